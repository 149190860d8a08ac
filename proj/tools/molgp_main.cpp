// Command-line frontend: tokenize, fingerprint, fit, predict, benchmark and
// calibrate subcommands over CSV datasets. Exit codes: 0 success, 1 usage
// error, 2 data/processing error.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "molgp/dataset.hpp"
#include "molgp/evaluation.hpp"
#include "molgp/fingerprint.hpp"
#include "molgp/gp.hpp"
#include "molgp/kernels.hpp"
#include "molgp/model_io.hpp"
#include "molgp/smiles.hpp"
#include "molgp/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

enum class Representation { Fingerprint, Smiles };

// All computation-relevant settings of one run. The representation always
// matches the kernel family: Tanimoto works on fingerprints, the string
// kernel on SMILES symbol sequences.
struct RunConfig {
  std::string dataset_path;
  std::string smiles_col;  // empty: auto-detect from known defaults
  std::string target_col;
  std::string kernel = "tanimoto";
  std::string fingerprints_path;  // optional precomputed hex fingerprints

  molgp::FingerprintConfig fp;
  int max_subseq = 5;
  double match_decay_init = 0.8;
  double gap_decay_init = 0.8;
  double signal_variance_init = 1.0;
  double noise_init = 0.1;
  bool fix_noise = false;

  int repeats = 20;
  double train_frac = 0.9;
  std::uint64_t seed = 0;
  int restarts = 3;
  int max_evals = 200;

  std::string out_dir = "molgp_out";

  Representation representation() const {
    return kernel == "ssk" ? Representation::Smiles : Representation::Fingerprint;
  }
  molgp::KernelFamily family() const {
    return kernel == "ssk" ? molgp::KernelFamily::Ssk : molgp::KernelFamily::Tanimoto;
  }
  molgp::KernelConfig kernel_init() const {
    if (family() == molgp::KernelFamily::Ssk) {
      molgp::SskConfig c;
      c.match_decay = match_decay_init;
      c.gap_decay = gap_decay_init;
      c.max_subsequence_length = max_subseq;
      c.signal_variance = signal_variance_init;
      return c;
    }
    molgp::TanimotoConfig c;
    c.signal_variance = signal_variance_init;
    return c;
  }
};

void resolve_run_columns(RunConfig& cfg) {
  const molgp::ResolvedColumns cols =
      molgp::resolve_columns(cfg.dataset_path, cfg.smiles_col, cfg.target_col);
  cfg.smiles_col = cols.smiles;
  cfg.target_col = cols.target;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw molgp::DataError(molgp::DataError::Kind::FileNotFound,
                           "cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

// The manifest records everything that determines the result bytes: command,
// flags, seed, dataset checksum and library version. Reruns with an
// identical manifest produce byte-identical result files. Output location
// and timestamps are deliberately excluded.
void write_manifest(const fs::path& out_dir, const std::string& command,
                    const std::map<std::string, std::string>& entries) {
  std::ofstream out(out_dir / "manifest.txt", std::ios::binary);
  out << "command = " << command << "\n";
  for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
  out << "library_version = " << molgp::version() << "\n";
}

std::map<std::string, std::string> manifest_entries(const RunConfig& cfg,
                                                    bool with_protocol) {
  std::map<std::string, std::string> m;
  m["dataset"] = cfg.dataset_path;
  m["dataset_checksum"] = molgp::file_checksum(cfg.dataset_path);
  m["smiles_col"] = cfg.smiles_col;
  m["target_col"] = cfg.target_col;
  m["kernel"] = cfg.kernel;
  if (!cfg.fingerprints_path.empty()) {
    m["fingerprints"] = cfg.fingerprints_path;
    m["fingerprints_checksum"] = molgp::file_checksum(cfg.fingerprints_path);
  }
  if (cfg.representation() == Representation::Fingerprint) {
    m["nbits"] = std::to_string(cfg.fp.n_bits);
    m["radius"] = std::to_string(cfg.fp.radius);
  } else {
    m["max_subseq"] = std::to_string(cfg.max_subseq);
    m["match_decay_init"] = fmt_double(cfg.match_decay_init);
    m["gap_decay_init"] = fmt_double(cfg.gap_decay_init);
  }
  m["signal_variance_init"] = fmt_double(cfg.signal_variance_init);
  m["noise_init"] = fmt_double(cfg.noise_init);
  m["fix_noise"] = cfg.fix_noise ? "true" : "false";
  m["restarts"] = std::to_string(cfg.restarts);
  m["max_evals"] = std::to_string(cfg.max_evals);
  m["seed"] = std::to_string(cfg.seed);
  if (with_protocol) {
    m["repeats"] = std::to_string(cfg.repeats);
    m["train_frac"] = fmt_double(cfg.train_frac);
  }
  return m;
}

struct PreparedData {
  molgp::Dataset dataset;
  molgp::Inputs inputs;
  molgp::ModelProvenance provenance;
};

PreparedData prepare_data(RunConfig& cfg) {
  resolve_run_columns(cfg);
  molgp::LoadReport report =
      molgp::load_csv(cfg.dataset_path, cfg.smiles_col, cfg.target_col);
  std::cerr << "[molgp] loaded " << report.n_loaded << " rows from " << cfg.dataset_path
            << " (" << report.n_skipped << " skipped)\n";

  PreparedData out;
  out.dataset = std::move(report.dataset);

  if (!cfg.fingerprints_path.empty()) {
    if (cfg.family() != molgp::KernelFamily::Tanimoto)
      throw molgp::GpError(molgp::GpError::Kind::RepresentationMismatch,
                           "precomputed fingerprints require the tanimoto kernel");
    std::vector<molgp::Fingerprint> fps =
        molgp::read_hex_fingerprints(cfg.fingerprints_path, cfg.fp.n_bits);
    if (fps.size() != out.dataset.smiles.size())
      throw molgp::DataError(molgp::DataError::Kind::CorruptFile,
                             "fingerprint file has " + std::to_string(fps.size()) +
                                 " rows but the dataset has " +
                                 std::to_string(out.dataset.smiles.size()));
    out.provenance.kind = molgp::ModelProvenance::InputKind::FingerprintHex;
    for (const auto& fp : fps) out.provenance.sources.push_back(fp.to_hex());
    out.provenance.fp_config = cfg.fp;
    out.inputs = std::move(fps);
    return out;
  }

  out.provenance.kind = molgp::ModelProvenance::InputKind::Smiles;
  out.provenance.sources = out.dataset.smiles;
  if (cfg.representation() == Representation::Fingerprint)
    out.provenance.fp_config = cfg.fp;
  out.inputs = molgp::inputs_from_smiles(out.dataset.smiles, cfg.family(), cfg.fp);
  return out;
}

molgp::ModelSpec model_spec_from(const RunConfig& cfg) {
  molgp::ModelSpec spec;
  spec.family = cfg.family();
  spec.kernel_init = cfg.kernel_init();
  spec.noise_init.noise_variance = cfg.noise_init;
  spec.fix_noise = cfg.fix_noise;
  spec.budget.restarts = cfg.restarts;
  spec.budget.max_evals = cfg.max_evals;
  spec.budget.seed = cfg.seed;
  return spec;
}

json kernel_json(const molgp::KernelConfig& k) {
  json j;
  if (const auto* tan = std::get_if<molgp::TanimotoConfig>(&k)) {
    j["family"] = "tanimoto";
    j["signal_variance"] = tan->signal_variance;
  } else {
    const auto& s = std::get<molgp::SskConfig>(k);
    j["family"] = "ssk";
    j["signal_variance"] = s.signal_variance;
    j["match_decay"] = s.match_decay;
    j["gap_decay"] = s.gap_decay;
    j["max_subsequence_length"] = s.max_subsequence_length;
  }
  return j;
}

json results_json(const RunConfig& cfg, const molgp::Dataset& ds,
                  const molgp::BenchmarkResult& result) {
  json j;
  j["schema_version"] = 1;
  j["library_version"] = molgp::version();
  j["dataset"] = {{"name", ds.name},
                  {"path", cfg.dataset_path},
                  {"checksum", molgp::file_checksum(cfg.dataset_path)},
                  {"n_molecules", ds.smiles.size()},
                  {"units", ds.units}};
  j["config"] = {{"kernel", cfg.kernel},
                 {"representation", cfg.representation() == Representation::Smiles
                                        ? "smiles"
                                        : "fingerprint"},
                 {"nbits", cfg.fp.n_bits},
                 {"radius", cfg.fp.radius},
                 {"max_subseq", cfg.max_subseq},
                 {"repeats", cfg.repeats},
                 {"train_frac", cfg.train_frac},
                 {"seed", cfg.seed},
                 {"restarts", cfg.restarts},
                 {"max_evals", cfg.max_evals},
                 {"fix_noise", cfg.fix_noise}};
  json per_split = json::array();
  for (std::size_t s = 0; s < result.splits.size(); ++s) {
    const auto& sp = result.splits[s];
    per_split.push_back({{"split", s},
                         {"rmse", sp.rmse},
                         {"n_test", sp.test_indices.size()},
                         {"kernel", kernel_json(sp.kernel)},
                         {"noise_variance", sp.noise.noise_variance},
                         {"lml", sp.lml}});
  }
  j["per_split"] = per_split;
  j["rmse_mean"] = result.rmse_mean;
  j["rmse_std"] = result.rmse_std;
  return j;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw molgp::DataError(molgp::DataError::Kind::FileNotFound,
                           "cannot write: " + path.string());
  out << content;
}

// --- subcommand bodies -----------------------------------------------------

int run_tokenize(const std::vector<std::string>& smiles, const std::string& input_file) {
  std::vector<std::string> all = smiles;
  if (!input_file.empty())
    for (const auto& l : read_lines(input_file)) all.push_back(l);
  if (all.empty()) {
    std::cerr << "molgp tokenize: no SMILES given\n";
    return 1;
  }
  static const char* kind_names[] = {"OrganicAtom", "AromaticAtom", "BracketAtom",
                                     "Bond",        "BranchOpen",   "BranchClose",
                                     "RingClosure", "Dot"};
  for (const std::string& s : all) {
    for (const molgp::SmilesToken& t : molgp::tokenize(s))
      std::cout << t.position << "\t" << kind_names[static_cast<int>(t.kind)] << "\t"
                << t.text << "\n";
    std::cout << "\n";
  }
  return 0;
}

int run_fingerprint(const std::vector<std::string>& smiles, const std::string& input_file,
                    const molgp::FingerprintConfig& fp, const std::string& out_file) {
  std::vector<std::string> all = smiles;
  if (!input_file.empty())
    for (const auto& l : read_lines(input_file)) all.push_back(l);
  if (all.empty()) {
    std::cerr << "molgp fingerprint: no SMILES given\n";
    return 1;
  }
  std::vector<molgp::Molecule> mols;
  mols.reserve(all.size());
  for (const auto& s : all) mols.push_back(molgp::parse(s));
  const std::vector<molgp::Fingerprint> fps = molgp::fingerprint_batch(mols, fp);

  std::ostringstream out;
  for (const auto& f : fps) out << f.to_hex() << "\n";
  if (out_file.empty()) std::cout << out.str();
  else write_text(out_file, out.str());
  return 0;
}

int run_fit(RunConfig& cfg) {
  PreparedData data = prepare_data(cfg);
  const molgp::ModelSpec spec = model_spec_from(cfg);

  const molgp::OptResult opt = molgp::optimize_hyperparameters(
      data.inputs, data.dataset.targets, spec.family, spec.kernel_init, spec.noise_init,
      spec.budget, spec.fix_noise);
  const molgp::GpModel model =
      molgp::fit(data.inputs, data.dataset.targets, opt.kernel, opt.noise);

  fs::create_directories(cfg.out_dir);
  molgp::save_model(model, data.provenance, (fs::path(cfg.out_dir) / "model.json").string());

  std::ostringstream trace;
  trace << "evaluation,lml,best_lml\n";
  for (std::size_t i = 0; i < opt.trace.size(); ++i)
    trace << i << "," << fmt_double(opt.trace[i].value) << ","
          << fmt_double(opt.trace[i].best) << "\n";
  write_text(fs::path(cfg.out_dir) / "lml_trace.csv", trace.str());

  write_manifest(cfg.out_dir, "fit", manifest_entries(cfg, false));
  std::cerr << "[molgp] fit done: lml = " << model.log_marginal_likelihood() << "\n";
  return 0;
}

int run_predict(const std::string& model_path, const std::vector<std::string>& smiles,
                const std::string& input_file, const std::string& fingerprints_path,
                const std::string& out_file) {
  const molgp::LoadedModel loaded = molgp::load_model(model_path);

  std::vector<std::string> all = smiles;
  if (!input_file.empty())
    for (const auto& l : read_lines(input_file)) all.push_back(l);

  molgp::Inputs test_inputs;
  std::vector<std::string> labels;
  if (!fingerprints_path.empty()) {
    const int n_bits = loaded.provenance.fp_config.value_or(molgp::FingerprintConfig{}).n_bits;
    std::vector<molgp::Fingerprint> fps =
        molgp::read_hex_fingerprints(fingerprints_path, n_bits);
    for (std::size_t i = 0; i < fps.size(); ++i) labels.push_back(std::to_string(i));
    test_inputs = std::move(fps);
  } else {
    if (all.empty()) {
      std::cerr << "molgp predict: no molecules given\n";
      return 1;
    }
    if (loaded.provenance.kind == molgp::ModelProvenance::InputKind::FingerprintHex)
      throw molgp::GpError(
          molgp::GpError::Kind::RepresentationMismatch,
          "model was trained on precomputed fingerprints; pass --fingerprints");
    labels = all;
    test_inputs = molgp::inputs_from_smiles(
        all, molgp::family_of(loaded.model.kernel_config()),
        loaded.provenance.fp_config.value_or(molgp::FingerprintConfig{}));
  }

  const std::vector<molgp::PredictiveDistribution> preds =
      loaded.model.predict(test_inputs);

  std::ostringstream out;
  out << "molecule,mean,std\n";
  for (std::size_t i = 0; i < preds.size(); ++i)
    out << "\"" << labels[i] << "\"," << fmt_double(preds[i].mean) << ","
        << fmt_double(preds[i].std) << "\n";
  if (out_file.empty()) std::cout << out.str();
  else write_text(out_file, out.str());
  return 0;
}

int run_benchmark_cmd(RunConfig& cfg) {
  PreparedData data = prepare_data(cfg);
  molgp::SplitSpec split_spec{cfg.train_frac, cfg.repeats, cfg.seed};
  const molgp::BenchmarkResult result = molgp::run_benchmark(
      data.inputs, data.dataset.targets, split_spec, model_spec_from(cfg));

  fs::create_directories(cfg.out_dir);
  write_text(fs::path(cfg.out_dir) / "benchmark_results.json",
             results_json(cfg, data.dataset, result).dump(2) + "\n");
  write_manifest(cfg.out_dir, "benchmark", manifest_entries(cfg, true));

  std::cerr << "[molgp] benchmark: rmse mean = " << result.rmse_mean
            << ", std = " << result.rmse_std << " over " << result.splits.size()
            << " splits\n";
  return 0;
}

int run_calibrate(RunConfig& cfg, const std::string& grid_arg, bool per_split_average) {
  PreparedData data = prepare_data(cfg);
  molgp::SplitSpec split_spec{cfg.train_frac, cfg.repeats, cfg.seed};
  const molgp::BenchmarkResult result = molgp::run_benchmark(
      data.inputs, data.dataset.targets, split_spec, model_spec_from(cfg));

  std::vector<double> grid;
  if (grid_arg.empty()) {
    grid = molgp::default_quantile_grid();
  } else {
    std::stringstream ss(grid_arg);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
  }

  const molgp::CalibrationCurve curve = molgp::benchmark_calibration(
      result, grid,
      per_split_average ? molgp::CalibrationPooling::PerSplitAverage
                        : molgp::CalibrationPooling::Pooled);

  fs::create_directories(cfg.out_dir);
  std::ostringstream csv;
  csv << "q,c_of_q\n";
  for (std::size_t i = 0; i < curve.quantiles.size(); ++i)
    csv << fmt_double(curve.quantiles[i]) << "," << fmt_double(curve.scores[i]) << "\n";
  write_text(fs::path(cfg.out_dir) / "calibration.csv", csv.str());
  write_text(fs::path(cfg.out_dir) / "benchmark_results.json",
             results_json(cfg, data.dataset, result).dump(2) + "\n");

  auto entries = manifest_entries(cfg, true);
  entries["per_split_average"] = per_split_average ? "true" : "false";
  std::ostringstream gridstr;
  for (std::size_t i = 0; i < grid.size(); ++i)
    gridstr << (i ? "," : "") << fmt_double(grid[i]);
  entries["quantile_grid"] = gridstr.str();
  write_manifest(cfg.out_dir, "calibrate", entries);

  std::cerr << "[molgp] calibrate: wrote " << curve.quantiles.size()
            << " grid points\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-process molecular property prediction"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::vector<std::string> positional_smiles;
  std::string input_file, model_path, out_file, quantile_grid;
  bool per_split_average = false;

  auto add_data_flags = [&](CLI::App* cmd) {
    cmd->add_option("--dataset", cfg.dataset_path, "CSV dataset with a header row")
        ->required();
    cmd->add_option("--smiles-col", cfg.smiles_col, "SMILES column name");
    cmd->add_option("--target-col", cfg.target_col, "target column name");
    cmd->add_option("--kernel", cfg.kernel, "kernel: tanimoto or ssk")
        ->check(CLI::IsMember({"tanimoto", "ssk"}));
    cmd->add_option("--fingerprints", cfg.fingerprints_path,
                    "precomputed hex fingerprint file (tanimoto only)");
    cmd->add_option("--radius", cfg.fp.radius, "fingerprint bond radius");
    cmd->add_option("--nbits", cfg.fp.n_bits, "fingerprint width in bits");
    cmd->add_option("--max-subseq", cfg.max_subseq, "string-kernel subsequence length");
    cmd->add_option("--seed", cfg.seed, "random seed");
    cmd->add_option("--restarts", cfg.restarts, "optimizer restarts");
    cmd->add_option("--max-evals", cfg.max_evals, "objective evaluations per restart");
    cmd->add_flag("--fix-noise", cfg.fix_noise, "keep the noise variance fixed");
    cmd->add_option("--noise-init", cfg.noise_init, "initial noise variance");
    cmd->add_option("--out-dir", cfg.out_dir, "output directory");
  };

  CLI::App* tok = app.add_subcommand("tokenize", "dump the SMILES token stream");
  tok->add_option("smiles", positional_smiles, "SMILES strings");
  tok->add_option("--input", input_file, "file with one SMILES per line");

  CLI::App* fpcmd = app.add_subcommand("fingerprint", "emit hex fingerprints");
  fpcmd->add_option("smiles", positional_smiles, "SMILES strings");
  fpcmd->add_option("--input", input_file, "file with one SMILES per line");
  fpcmd->add_option("--radius", cfg.fp.radius, "fingerprint bond radius");
  fpcmd->add_option("--nbits", cfg.fp.n_bits, "fingerprint width in bits");
  fpcmd->add_option("--out", out_file, "output file (default stdout)");

  CLI::App* fit = app.add_subcommand("fit", "train one model");
  add_data_flags(fit);

  CLI::App* predict = app.add_subcommand("predict", "predict mean and std per molecule");
  predict->add_option("--model", model_path, "model file from fit")->required();
  predict->add_option("smiles", positional_smiles, "SMILES strings");
  predict->add_option("--input", input_file, "file with one SMILES per line");
  predict->add_option("--fingerprints", cfg.fingerprints_path,
                      "hex fingerprint file for the test molecules");
  predict->add_option("--out", out_file, "output file (default stdout)");

  CLI::App* bench = app.add_subcommand("benchmark", "repeated random-split RMSE protocol");
  add_data_flags(bench);
  bench->add_option("--repeats", cfg.repeats, "number of random splits");
  bench->add_option("--train-frac", cfg.train_frac, "training fraction");

  CLI::App* cal = app.add_subcommand("calibrate", "uncertainty-calibration protocol");
  add_data_flags(cal);
  cal->add_option("--repeats", cfg.repeats, "number of random splits");
  cal->add_option("--train-frac", cfg.train_frac, "training fraction");
  cal->add_option("--quantile-grid", quantile_grid, "comma-separated q values");
  cal->add_flag("--per-split-average", per_split_average,
                "average per-split curves instead of pooling residuals");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (tok->parsed()) return run_tokenize(positional_smiles, input_file);
    if (fpcmd->parsed()) return run_fingerprint(positional_smiles, input_file, cfg.fp, out_file);
    if (fit->parsed()) return run_fit(cfg);
    if (predict->parsed())
      return run_predict(model_path, positional_smiles, input_file,
                         cfg.fingerprints_path, out_file);
    if (bench->parsed()) return run_benchmark_cmd(cfg);
    if (cal->parsed()) return run_calibrate(cfg, quantile_grid, per_split_average);
  } catch (const molgp::Error& e) {
    std::cerr << "molgp: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "molgp: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
