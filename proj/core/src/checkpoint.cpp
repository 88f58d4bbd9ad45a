#include "presda/checkpoint.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "presda/binio.hpp"

namespace presda::train {

using nlohmann::json;

namespace {

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path) {
    if (ckpt.meta.val_auc < 0.0 || ckpt.meta.val_auc > 1.0)
        throw std::invalid_argument("checkpoint: val_auc outside [0, 1]");

    json manifest;
    manifest["arch_hash"] = hash_hex(ckpt.params.arch_hash());
    manifest["feature_maps"] = ckpt.params.feature_maps;
    manifest["bn_batches_seen"] = ckpt.params.bn_batches_seen;
    json layers = json::array();
    ckpt.params.for_each_tensor(
        [&](const std::string& name, const std::vector<double>& v) {
            layers.push_back({{"name", name}, {"size", v.size()}});
        });
    manifest["layers"] = layers;
    manifest["seed"] = ckpt.meta.seed;
    manifest["metadata"] = {{"val_auc", ckpt.meta.val_auc},
                            {"epoch", ckpt.meta.epoch},
                            {"val_record_ids", ckpt.meta.val_record_ids},
                            {"config_hash", ckpt.meta.config_hash}};

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write checkpoint " + path.string());
    os << manifest.dump() << '\n';
    ckpt.params.for_each_tensor(
        [&](const std::string&, const std::vector<double>& v) { write_f32(os, v); });
    if (!os) throw std::runtime_error("I/O failure writing " + path.string());
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint " + path.string());
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error(path.string() + ": missing checkpoint manifest");
    json manifest;
    try {
        manifest = json::parse(line);
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": bad checkpoint manifest: " +
                                 e.what());
    }

    ModelCheckpoint ckpt;
    const int feature_maps = manifest.at("feature_maps").get<int>();
    ckpt.params = net::init_params(0, feature_maps);
    ckpt.params.bn_batches_seen = manifest.at("bn_batches_seen").get<std::int64_t>();

    if (manifest.at("arch_hash").get<std::string>() !=
        hash_hex(ckpt.params.arch_hash()))
        throw std::runtime_error(path.string() + ": architecture hash mismatch");

    const auto& layers = manifest.at("layers");
    std::size_t li = 0;
    ckpt.params.for_each_tensor([&](const std::string& name, std::vector<double>& v) {
        if (li >= layers.size())
            throw std::runtime_error(path.string() + ": checkpoint manifest too short");
        const auto& entry = layers[li++];
        if (entry.at("name").get<std::string>() != name ||
            entry.at("size").get<std::size_t>() != v.size())
            throw std::runtime_error(path.string() + ": tensor layout mismatch at " +
                                     name);
        v = read_f32_as_double(is, v.size());
    });
    if (li != layers.size())
        throw std::runtime_error(path.string() + ": extra tensors in manifest");

    const auto& md = manifest.at("metadata");
    ckpt.meta.val_auc = md.at("val_auc").get<double>();
    ckpt.meta.epoch = md.at("epoch").get<int>();
    ckpt.meta.val_record_ids = md.at("val_record_ids").get<std::vector<std::string>>();
    ckpt.meta.config_hash = md.value("config_hash", "");
    ckpt.meta.seed = manifest.at("seed").get<std::uint64_t>();
    return ckpt;
}

void EnsembleModel::validate() const {
    if (members.size() != 3)
        throw std::invalid_argument("ensemble must have exactly 3 members");
    std::set<std::set<std::string>> val_sets;
    for (const auto& m : members)
        val_sets.insert(std::set<std::string>(m.meta.val_record_ids.begin(),
                                              m.meta.val_record_ids.end()));
    if (val_sets.size() != 3)
        throw std::invalid_argument("ensemble members must have distinct validation sets");
    for (std::size_t i = 1; i < members.size(); ++i)
        if (members[i].params.arch_hash() != members[0].params.arch_hash())
            throw std::invalid_argument("ensemble members must share one architecture");
}

void save_ensemble(const EnsembleModel& ensemble,
                   const std::filesystem::path& manifest_path) {
    ensemble.validate();
    const std::string stem = manifest_path.stem().string();
    json j;
    json members = json::array();
    for (std::size_t i = 0; i < ensemble.members.size(); ++i) {
        const std::string member_name = stem + "_member" + std::to_string(i) + ".ckpt";
        save_checkpoint(ensemble.members[i],
                        manifest_path.parent_path() / member_name);
        members.push_back(member_name);
    }
    j["members"] = members;
    j["arch_hash"] = hash_hex(ensemble.members[0].params.arch_hash());
    std::ofstream os(manifest_path, std::ios::trunc);
    if (!os)
        throw std::runtime_error("cannot write ensemble manifest " +
                                 manifest_path.string());
    os << j.dump(2) << '\n';
}

EnsembleModel load_ensemble(const std::filesystem::path& manifest_path) {
    std::ifstream is(manifest_path);
    if (!is)
        throw std::runtime_error("cannot open ensemble manifest " +
                                 manifest_path.string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(manifest_path.string() + ": bad ensemble manifest: " +
                                 e.what());
    }
    EnsembleModel ens;
    for (const auto& m : j.at("members"))
        ens.members.push_back(load_checkpoint(manifest_path.parent_path() /
                                              m.get<std::string>()));
    ens.validate();
    return ens;
}

EnsembleModel load_model_any(const std::filesystem::path& path) {
    if (path.extension() == ".json") return load_ensemble(path);
    EnsembleModel single;
    single.members.push_back(load_checkpoint(path));
    return single;
}

}  // namespace presda::train
