#include "lockbench/lock_package.hpp"

#include "json.hpp"

#include <fstream>

namespace lockbench {

void write_key_file(const LockPackage &pkg, const std::filesystem::path &path)
{
	nlohmann::ordered_json j;
	j["method"] = pkg.meta.method;
	j["seed"] = pkg.meta.seed;
	j["params"] = pkg.meta.params;
	j["targets"] = {{"mode", pkg.meta.target_mode}, {"ffs", pkg.meta.target_ffs}};
	nlohmann::ordered_json key = nlohmann::ordered_json::object();
	for (const auto &[name, bit] : pkg.correct_key)
		key[name] = bit ? 1 : 0;
	j["key"] = key;
	if (!pkg.contents_file.empty()) {
		j["contents_file"] = pkg.contents_file;
		j["address_layout"] = pkg.address_layout;
	}
	std::ofstream out(path);
	if (!out)
		throw NetlistError("cannot write key file '" + path.string() + "'");
	out << j.dump(2) << "\n";
}

KeyFile read_key_file(const std::filesystem::path &path)
{
	std::ifstream in(path);
	if (!in)
		throw NetlistError("cannot read key file '" + path.string() + "'");
	nlohmann::json j;
	try {
		in >> j;
	} catch (const nlohmann::json::exception &e) {
		throw NetlistError("bad key file '" + path.string() + "': " + e.what());
	}
	KeyFile kf;
	kf.method = j.at("method").get<std::string>();
	kf.seed = j.value("seed", uint64_t(0));
	if (j.contains("params"))
		kf.params = j["params"].get<std::map<std::string, int64_t>>();
	for (const auto &[name, bit] : j.at("key").items())
		kf.key[name] = bit.get<int>() != 0;
	kf.contents_file = j.value("contents_file", std::string());
	kf.address_layout = j.value("address_layout", std::string());
	return kf;
}

} // namespace lockbench
