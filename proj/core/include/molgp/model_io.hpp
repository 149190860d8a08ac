#ifndef MOLGP_MODEL_IO_HPP
#define MOLGP_MODEL_IO_HPP

#include <optional>
#include <string>
#include <vector>

#include "molgp/errors.hpp"
#include "molgp/fingerprint.hpp"
#include "molgp/gp.hpp"

namespace molgp {

// Where the model's training inputs came from: SMILES strings that are
// re-parsed on load, or precomputed hex fingerprints.
struct ModelProvenance {
  enum class InputKind { Smiles, FingerprintHex };

  InputKind kind = InputKind::Smiles;
  std::vector<std::string> sources;  // SMILES strings or hex lines, in order
  std::optional<FingerprintConfig> fp_config;  // set for fingerprint models
};

// Versioned JSON persistence. The file records the kernel family and all
// hyperparameters, the training sources, targets and standardization stats;
// the Cholesky factor is recomputed on load, so a round trip reproduces
// predictions exactly.
inline constexpr int kModelFormatVersion = 1;

void save_model(const GpModel& model, const ModelProvenance& provenance,
                const std::string& path);

struct LoadedModel {
  GpModel model;
  ModelProvenance provenance;
};

// Throws FileNotFound, VersionMismatch (unknown format_version) or
// CorruptFile (unparseable/truncated/missing fields).
LoadedModel load_model(const std::string& path);

}  // namespace molgp

#endif
