#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "molgp/dataset.hpp"
#include "molgp/smiles.hpp"

using namespace molgp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

}  // namespace

TEST_SUITE_BEGIN("dataset");

TEST_CASE("csv parsing handles quoting") {
  const auto records = parse_csv("a,b,c\n\"x,y\",\"say \"\"hi\"\"\",3\r\nlast,,\n");
  REQUIRE(records.size() == 3);
  CHECK(records[0] == std::vector<std::string>{"a", "b", "c"});
  CHECK(records[1] == std::vector<std::string>{"x,y", "say \"hi\"", "3"});
  CHECK(records[2] == std::vector<std::string>{"last", "", ""});
}

TEST_CASE("load_csv skips bad rows and preserves order") {
  TempDir dir("molgp_dataset_test");
  const fs::path csv = dir.path / "tiny.csv";
  write_file(csv,
             "name,smiles,logS\n"
             "\"ethanol, neat\",CCO,-0.77\n"
             "acetic acid,CC(=O)O,-0.17\n"
             "broken,CCN,not_a_number\n"
             "missing,,1.0\n"
             "benzene,c1ccccc1,-2.13\n");

  const LoadReport report = load_csv(csv.string(), "smiles", "logS");
  CHECK(report.n_loaded == 3);
  CHECK(report.n_skipped == 2);
  CHECK(report.skipped_rows == std::vector<std::size_t>{2, 3});
  CHECK(report.dataset.smiles ==
        std::vector<std::string>{"CCO", "CC(=O)O", "c1ccccc1"});
  CHECK(report.dataset.targets[0] == doctest::Approx(-0.77));
  CHECK(report.dataset.name == "tiny");
  CHECK(report.dataset.units == "logS");

  // Idempotent: loading again yields the same dataset.
  const LoadReport again = load_csv(csv.string(), "smiles", "logS");
  CHECK(again.dataset.smiles == report.dataset.smiles);
  CHECK(again.dataset.targets == report.dataset.targets);
}

TEST_CASE("load_csv error kinds") {
  TempDir dir("molgp_dataset_err");
  try {
    load_csv((dir.path / "nope.csv").string(), "smiles", "y");
    FAIL_CHECK("expected FileNotFound");
  } catch (const DataError& e) {
    CHECK(e.kind == DataError::Kind::FileNotFound);
  }

  const fs::path csv = dir.path / "cols.csv";
  write_file(csv, "a,b\n1,2\n");
  try {
    load_csv(csv.string(), "smiles", "b");
    FAIL_CHECK("expected MissingColumn");
  } catch (const DataError& e) {
    CHECK(e.kind == DataError::Kind::MissingColumn);
  }

  const fs::path empty = dir.path / "empty.csv";
  write_file(empty, "smiles,y\n,x\nCC,nope\n");
  try {
    load_csv(empty.string(), "smiles", "y");
    FAIL_CHECK("expected NoValidRows");
  } catch (const DataError& e) {
    CHECK(e.kind == DataError::Kind::NoValidRows);
  }
}

TEST_CASE("column resolution uses documented defaults") {
  TempDir dir("molgp_dataset_cols");
  const fs::path esol_like = dir.path / "esol_like.csv";
  write_file(esol_like,
             "Compound ID,measured log solubility in mols per litre,smiles\n"
             "x,-1.0,CCO\n");
  const ResolvedColumns cols = resolve_columns(esol_like.string(), "", "");
  CHECK(cols.smiles == "smiles");
  CHECK(cols.target == "measured log solubility in mols per litre");

  const fs::path freesolv_like = dir.path / "freesolv_like.csv";
  write_file(freesolv_like, "iupac,smiles,expt,calc\nx,CCO,-5.0,-4.9\n");
  const ResolvedColumns f = resolve_columns(freesolv_like.string(), "", "");
  CHECK(f.target == "expt");

  // Explicit hints win.
  const ResolvedColumns hinted = resolve_columns(freesolv_like.string(), "iupac", "calc");
  CHECK(hinted.smiles == "iupac");
  CHECK(hinted.target == "calc");

  const fs::path unknown = dir.path / "unknown.csv";
  write_file(unknown, "a,b\n1,2\n");
  CHECK_THROWS_AS(resolve_columns(unknown.string(), "", ""), DataError);
}

TEST_CASE("file checksum is content-addressed") {
  TempDir dir("molgp_dataset_sum");
  const fs::path f1 = dir.path / "one.txt";
  const fs::path f2 = dir.path / "two.txt";
  write_file(f1, "hello");
  write_file(f2, "hello");
  CHECK(file_checksum(f1.string()) == file_checksum(f2.string()));
  CHECK(file_checksum(f1.string()).size() == 16);
  write_file(f2, "hello!");
  CHECK(file_checksum(f1.string()) != file_checksum(f2.string()));
}

TEST_CASE("inputs_from_smiles builds both representations") {
  const std::vector<std::string> smiles = {"CCO", "c1ccccc1"};

  const Inputs fps = inputs_from_smiles(smiles, KernelFamily::Tanimoto,
                                        FingerprintConfig{512, 2});
  REQUIRE(std::holds_alternative<std::vector<Fingerprint>>(fps));
  CHECK(std::get<std::vector<Fingerprint>>(fps).size() == 2);

  const Inputs seqs = inputs_from_smiles(smiles, KernelFamily::Ssk, FingerprintConfig{});
  REQUIRE(std::holds_alternative<std::vector<SymbolSeq>>(seqs));
  CHECK(std::get<std::vector<SymbolSeq>>(seqs)[1].size() == 8);

  try {
    inputs_from_smiles({"CCO", "C(C"}, KernelFamily::Ssk, FingerprintConfig{});
    FAIL_CHECK("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("molecule 1") != std::string::npos);
  }
}

TEST_SUITE_END();
