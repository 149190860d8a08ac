#ifndef MOLGP_DATASET_HPP
#define MOLGP_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "molgp/errors.hpp"
#include "molgp/fingerprint.hpp"
#include "molgp/kernels.hpp"

namespace molgp {

struct Dataset {
  std::vector<std::string> smiles;
  std::vector<double> targets;
  std::string name;
  std::string units;
};

struct LoadReport {
  Dataset dataset;
  std::size_t n_loaded = 0;
  std::size_t n_skipped = 0;
  std::vector<std::size_t> skipped_rows;  // 0-based data row indices (header excluded)
};

// Loads a header-row CSV (RFC-4180 quoting). Rows with a missing or
// non-numeric target, or an empty SMILES, are skipped and their indices
// recorded. Throws FileNotFound, MissingColumn or NoValidRows.
LoadReport load_csv(const std::string& path, const std::string& smiles_column,
                    const std::string& target_column);

struct ResolvedColumns {
  std::string smiles;
  std::string target;
};

// Fills empty hints from the documented per-dataset defaults by matching the
// file's header: SMILES column "smiles"/"SMILES"; target column
// "measured log solubility in mols per litre" (ESOL), "expt" (FreeSolv) or
// "E isomer pi-pi* wavelength in nm" (Photoswitch). Throws MissingColumn
// when nothing matches.
ResolvedColumns resolve_columns(const std::string& path, const std::string& smiles_hint,
                                const std::string& target_hint);

// Parses raw CSV text into records. Exposed for tests.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

// FNV-1a 64 over the raw file bytes, as a 16-digit lowercase hex string.
// Used by run manifests.
std::string file_checksum(const std::string& path);

// Builds kernel inputs from SMILES strings: fingerprints for the Tanimoto
// kernel, tokenizer symbol sequences for the string kernel. Parse failures
// propagate with the molecule index in the message.
Inputs inputs_from_smiles(const std::vector<std::string>& smiles, KernelFamily family,
                          const FingerprintConfig& fp_cfg);

}  // namespace molgp

#endif
