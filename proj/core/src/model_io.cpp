#include "molgp/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "molgp/dataset.hpp"
#include "molgp/version.hpp"

namespace molgp {

namespace {

using nlohmann::json;

json kernel_to_json(const KernelConfig& cfg) {
  json j;
  if (const auto* tan = std::get_if<TanimotoConfig>(&cfg)) {
    j["family"] = "tanimoto";
    j["signal_variance"] = tan->signal_variance;
  } else {
    const auto& ssk = std::get<SskConfig>(cfg);
    j["family"] = "ssk";
    j["signal_variance"] = ssk.signal_variance;
    j["match_decay"] = ssk.match_decay;
    j["gap_decay"] = ssk.gap_decay;
    j["max_subsequence_length"] = ssk.max_subsequence_length;
    j["normalize"] = ssk.normalize;
    j["sum_all_lengths"] = ssk.sum_all_lengths;
  }
  return j;
}

KernelConfig kernel_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "tanimoto") {
    TanimotoConfig cfg;
    cfg.signal_variance = j.at("signal_variance").get<double>();
    return cfg;
  }
  if (family == "ssk") {
    SskConfig cfg;
    cfg.signal_variance = j.at("signal_variance").get<double>();
    cfg.match_decay = j.at("match_decay").get<double>();
    cfg.gap_decay = j.at("gap_decay").get<double>();
    cfg.max_subsequence_length = j.at("max_subsequence_length").get<int>();
    cfg.normalize = j.at("normalize").get<bool>();
    cfg.sum_all_lengths = j.at("sum_all_lengths").get<bool>();
    return cfg;
  }
  throw DataError(DataError::Kind::CorruptFile, "unknown kernel family: " + family);
}

}  // namespace

void save_model(const GpModel& model, const ModelProvenance& provenance,
                const std::string& path) {
  if (provenance.sources.size() != input_count(model.train_inputs()))
    throw std::invalid_argument("provenance sources do not match training inputs");

  json j;
  j["format_version"] = kModelFormatVersion;
  j["library_version"] = version();
  j["kernel"] = kernel_to_json(model.kernel_config());
  j["noise"] = {{"noise_variance", model.noise().noise_variance},
                {"jitter", model.noise().jitter}};
  j["target_stats"] = {{"mean", model.target_stats().mean},
                       {"std", model.target_stats().std}};
  j["input_kind"] = provenance.kind == ModelProvenance::InputKind::Smiles
                        ? "smiles"
                        : "fingerprint_hex";
  if (provenance.fp_config) {
    j["fingerprint_config"] = {{"n_bits", provenance.fp_config->n_bits},
                               {"radius", provenance.fp_config->radius}};
  }
  j["training_inputs"] = provenance.sources;
  j["training_targets"] = model.train_targets();

  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw DataError(DataError::Kind::FileNotFound, "cannot write model file: " + path);
  out << j.dump(2) << "\n";
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError(DataError::Kind::FileNotFound, "cannot open model file: " + path);

  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(DataError::Kind::CorruptFile,
                    "cannot parse model file " + path + ": " + e.what());
  }

  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw DataError(DataError::Kind::VersionMismatch,
                      "model format version " + std::to_string(version) +
                          " is not supported (expected " +
                          std::to_string(kModelFormatVersion) + ")");

    ModelProvenance prov;
    const std::string kind = j.at("input_kind").get<std::string>();
    prov.kind = kind == "fingerprint_hex" ? ModelProvenance::InputKind::FingerprintHex
                                          : ModelProvenance::InputKind::Smiles;
    prov.sources = j.at("training_inputs").get<std::vector<std::string>>();
    if (j.contains("fingerprint_config")) {
      FingerprintConfig fp;
      fp.n_bits = j["fingerprint_config"].at("n_bits").get<int>();
      fp.radius = j["fingerprint_config"].at("radius").get<int>();
      prov.fp_config = fp;
    }

    const KernelConfig kernel = kernel_from_json(j.at("kernel"));
    NoiseConfig noise;
    noise.noise_variance = j.at("noise").at("noise_variance").get<double>();
    noise.jitter = j.at("noise").at("jitter").get<double>();
    TargetStats stats;
    stats.mean = j.at("target_stats").at("mean").get<double>();
    stats.std = j.at("target_stats").at("std").get<double>();
    const std::vector<double> targets =
        j.at("training_targets").get<std::vector<double>>();
    if (targets.size() != prov.sources.size())
      throw DataError(DataError::Kind::CorruptFile,
                      "training_inputs/training_targets size mismatch");

    Inputs inputs;
    if (prov.kind == ModelProvenance::InputKind::FingerprintHex) {
      std::vector<Fingerprint> fps;
      fps.reserve(prov.sources.size());
      for (const std::string& hex : prov.sources)
        fps.push_back(Fingerprint::from_hex(hex));
      inputs = std::move(fps);
    } else {
      inputs = inputs_from_smiles(prov.sources, family_of(kernel),
                                  prov.fp_config.value_or(FingerprintConfig{}));
    }

    LoadedModel loaded{GpModel::assemble(std::move(inputs), targets, kernel, noise, stats),
                       std::move(prov)};
    return loaded;
  } catch (const DataError&) {
    throw;
  } catch (const json::exception& e) {
    throw DataError(DataError::Kind::CorruptFile,
                    "model file " + path + " is missing fields: " + e.what());
  }
}

}  // namespace molgp
