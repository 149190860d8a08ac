#include "molgp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "molgp/parallel.hpp"
#include "molgp/smiles.hpp"

namespace molgp {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;  // true once the current record has any content

  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < n && text[i + 1] == '\n') ++i;
      if (field_started || !field.empty()) {
        record.push_back(std::move(field));
        field.clear();
        records.push_back(std::move(record));
        record.clear();
        field_started = false;
      }
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (field_started || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

namespace {

bool parse_target(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end != begin + s.size()) return false;
  return std::isfinite(out);
}

}  // namespace

LoadReport load_csv(const std::string& path, const std::string& smiles_column,
                    const std::string& target_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError(DataError::Kind::FileNotFound, "cannot open dataset: " + path);
  std::stringstream buf;
  buf << in.rdbuf();

  const std::vector<std::vector<std::string>> records = parse_csv(buf.str());
  if (records.empty())
    throw DataError(DataError::Kind::NoValidRows, "empty CSV: " + path);

  const std::vector<std::string>& header = records[0];
  long smiles_idx = -1, target_idx = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == smiles_column) smiles_idx = static_cast<long>(c);
    if (header[c] == target_column) target_idx = static_cast<long>(c);
  }
  if (smiles_idx < 0)
    throw DataError(DataError::Kind::MissingColumn,
                    "column '" + smiles_column + "' not found in " + path);
  if (target_idx < 0)
    throw DataError(DataError::Kind::MissingColumn,
                    "column '" + target_column + "' not found in " + path);

  LoadReport report;
  report.dataset.name = std::filesystem::path(path).stem().string();
  report.dataset.units = target_column;

  for (std::size_t r = 1; r < records.size(); ++r) {
    const std::size_t row = r - 1;
    const std::vector<std::string>& rec = records[r];
    const std::size_t need =
        static_cast<std::size_t>(std::max(smiles_idx, target_idx)) + 1;
    double target = 0.0;
    if (rec.size() < need || rec[static_cast<std::size_t>(smiles_idx)].empty() ||
        !parse_target(rec[static_cast<std::size_t>(target_idx)], target)) {
      report.skipped_rows.push_back(row);
      continue;
    }
    report.dataset.smiles.push_back(rec[static_cast<std::size_t>(smiles_idx)]);
    report.dataset.targets.push_back(target);
  }

  report.n_loaded = report.dataset.smiles.size();
  report.n_skipped = report.skipped_rows.size();
  if (report.n_loaded == 0)
    throw DataError(DataError::Kind::NoValidRows, "no usable rows in " + path);

  for (std::size_t row : report.skipped_rows)
    warn("skipped row " + std::to_string(row) + " of " + path +
         " (missing/invalid target or empty SMILES)");
  return report;
}

ResolvedColumns resolve_columns(const std::string& path, const std::string& smiles_hint,
                                const std::string& target_hint) {
  ResolvedColumns out{smiles_hint, target_hint};
  if (!out.smiles.empty() && !out.target.empty()) return out;

  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError(DataError::Kind::FileNotFound, "cannot open dataset: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto records = parse_csv(buf.str());
  if (records.empty())
    throw DataError(DataError::Kind::NoValidRows, "empty CSV: " + path);
  const std::vector<std::string>& header = records[0];

  static const std::vector<std::string> smiles_defaults = {"smiles", "SMILES"};
  static const std::vector<std::string> target_defaults = {
      "measured log solubility in mols per litre",  // ESOL
      "expt",                                       // FreeSolv
      "E isomer pi-pi* wavelength in nm",           // Photoswitch
  };
  auto pick = [&](const std::vector<std::string>& candidates) -> std::string {
    for (const std::string& c : candidates)
      for (const std::string& h : header)
        if (h == c) return c;
    return {};
  };

  if (out.smiles.empty()) out.smiles = pick(smiles_defaults);
  if (out.target.empty()) out.target = pick(target_defaults);
  if (out.smiles.empty())
    throw DataError(DataError::Kind::MissingColumn,
                    "no SMILES column found in " + path + "; pass the name explicitly");
  if (out.target.empty())
    throw DataError(DataError::Kind::MissingColumn,
                    "no target column found in " + path + "; pass the name explicitly");
  return out;
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError(DataError::Kind::FileNotFound, "cannot open file: " + path);

  std::uint64_t h = 14695981039346656037ULL;
  char chunk[4096];
  while (in.read(chunk, sizeof chunk) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(chunk[i]);
      h *= 1099511628211ULL;
    }
    if (got < static_cast<std::streamsize>(sizeof chunk)) break;
  }

  static const char digits[] = "0123456789abcdef";
  std::string hex(16, '0');
  for (int i = 15; i >= 0; --i) {
    hex[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return hex;
}

Inputs inputs_from_smiles(const std::vector<std::string>& smiles, KernelFamily family,
                          const FingerprintConfig& fp_cfg) {
  if (family == KernelFamily::Ssk) {
    std::vector<SymbolSeq> seqs(smiles.size());
    parallel_for(smiles.size(), [&](std::size_t i) {
      try {
        seqs[i] = tokenize_symbols(smiles[i]);
      } catch (const ParseError& e) {
        throw ParseError(e.kind, e.position,
                         "molecule " + std::to_string(i) + ": " + e.what());
      }
    });
    return seqs;
  }

  std::vector<Molecule> mols(smiles.size());
  parallel_for(smiles.size(), [&](std::size_t i) {
    try {
      mols[i] = parse(smiles[i]);
    } catch (const ParseError& e) {
      throw ParseError(e.kind, e.position,
                       "molecule " + std::to_string(i) + ": " + e.what());
    }
  });
  return fingerprint_batch(mols, fp_cfg);
}

}  // namespace molgp
