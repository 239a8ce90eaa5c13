#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

// End-to-end checks of the command-line contract: exit codes, emitted files,
// manifests, and byte-level determinism. Runs the binary from the build
// directory (ctest's working directory), so only cheap commands are used.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qoc/io.hpp"
#include "qoc/sequence.hpp"
#include "qoc/synth.hpp"

using namespace qoc;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() : path(std::filesystem::temp_directory_path() / "qoc_cli_test") {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = "./quditpulse " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("help and version exit cleanly") {
  CHECK(run("--help") == 0);
  CHECK(run("--version") == 0);
  CHECK(run("compile-cz --help") == 0);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("compile-cz") == 2);                        // missing --d
  CHECK(run("compile-cz --d 1") == 2);                  // invalid dimension
  CHECK(run("compile-cz --d three") == 2);              // unparsable number
  CHECK(run("synthesize --gate cr --d 3") == 2);        // missing --theta
  CHECK(run("synthesize --gate y --d 2") == 2);         // unknown gate
  CHECK(run("simulate") == 2);                          // nothing to simulate
  CHECK(run("simulate --pulse /no/such/file.json") == 2);
}

TEST_CASE("infeasible requests exit with code 3") {
  TempDir tmp;
  // CZ(4) cannot be reached with single-level pulses at any count
  CHECK(run("compile-cz --d 4 --max-tones 1 --out-dir " + tmp.file("a")) == 3);
}

TEST_CASE("compile-cz writes a verifiable sequence and manifest") {
  TempDir tmp;
  REQUIRE(run("compile-cz --d 3 --out-dir " + tmp.file("a")) == 0);

  const json seq_j = load_json_file(tmp.file("a/cz_d3.json"));
  const GateSequence seq = sequence_from_json(seq_j);
  CHECK(seq.cr_count() == 3);
  CHECK(max_dev_up_to_global_phase(sequence_to_unitary(seq), cz_gate(3)) < 1e-9);

  const json man = load_json_file(tmp.file("a/compile-cz_manifest.json"));
  require_kind(man, "manifest");
  CHECK(man.at("command").get<std::string>().find("--d 3") != std::string::npos);
  bool lists_output = false;
  for (const auto& f : man.at("outputs"))
    lists_output = lists_output || f.get<std::string>().find("cz_d3.json") != std::string::npos;
  CHECK(lists_output);

  // the same command line reproduces the artifact byte for byte
  REQUIRE(run("compile-cz --d 3 --out-dir " + tmp.file("b")) == 0);
  CHECK(slurp(tmp.file("a/cz_d3.json")) == slurp(tmp.file("b/cz_d3.json")));
}

TEST_CASE("lowered sequences only drive the coupled levels") {
  TempDir tmp;
  REQUIRE(run("compile-cz --d 5 --lower --out-dir " + tmp.file("a")) == 0);
  const GateSequence seq = sequence_from_json(load_json_file(tmp.file("a/cz_d5_lowered.json")));
  for (const GateStep& s : seq.steps)
    if (s.kind == GateStep::Kind::Cr)
      for (int t : s.targets) CHECK((t == 1 || t == 2));
  CHECK(max_dev_up_to_global_phase(sequence_to_unitary(seq), cz_gate(5)) < 1e-9);
}

TEST_CASE("simulate benchmarks a pulse file and records the run") {
  TempDir tmp;
  PulseSchedule ps;
  ps.tones = {{1, 2, kOmegaBar}};
  ps.grid = TimeGrid{0.1e-6, 12};
  ps.amp_frac = {std::vector<double>(12, 1.0)};
  ps.phase = {std::vector<double>(12, 0.0)};
  ps.label = "cr";
  ps.theta = pi;
  ps.target_levels = {1};
  ps.chi = {0.0};
  ps.extra = {{"d", 2}};
  json j = ps.to_json();
  stamp(j, "pulse");
  save_json_file(tmp.file("hold.json"), j);

  REQUIRE(run("simulate --pulse " + tmp.file("hold.json") +
              " --n-traj 64 --blockade-V inf --seed 5 --out-dir " + tmp.file("r")) == 0);
  const json res = load_json_file(tmp.file("r/sim_result.json"));
  require_kind(res, "result");
  CHECK(res.at("n_traj").get<int>() == 64);
  CHECK(res.at("fidelity").get<double>() >= 0.0);
  CHECK(res.at("fidelity").get<double>() <= 1.0);

  // same seed, same numbers
  REQUIRE(run("simulate --pulse " + tmp.file("hold.json") +
              " --n-traj 64 --blockade-V inf --seed 5 --out-dir " + tmp.file("s")) == 0);
  CHECK(slurp(tmp.file("r/sim_result.json")) == slurp(tmp.file("s/sim_result.json")));
}

TEST_CASE("config files feed defaults that explicit flags override") {
  TempDir tmp;
  save_json_file(tmp.file("cfg.json"), json{{"d", 3}});
  CHECK(run("compile-cz --config " + tmp.file("cfg.json") + " --out-dir " + tmp.file("a")) == 0);
  CHECK(std::filesystem::exists(tmp.file("a/cz_d3.json")));

  // the flag wins over the config value
  CHECK(run("compile-cz --config " + tmp.file("cfg.json") + " --d 4 --out-dir " +
            tmp.file("b")) == 0);
  CHECK(std::filesystem::exists(tmp.file("b/cz_d4.json")));
}

TEST_CASE("check-nogo reports both regimes") {
  TempDir tmp;
  CHECK(run("check-nogo --d 3 --trials 20 --out-dir " + tmp.file("a")) == 0);
  CHECK(run("check-nogo --d 4 --trials 20 --out-dir " + tmp.file("b")) == 0);
  const json rep = load_json_file(tmp.file("b/nogo_report.json"));
  require_kind(rep, "nogo");
  CHECK_FALSE(rep.at("additive_split_feasible").get<bool>());
  CHECK(rep.at("certificate").size() > 0);
}
