#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ebnp/bench.hpp"
#include "ebnp/cli.hpp"
#include "ebnp/divergence.hpp"
#include "ebnp/exactdp.hpp"
#include "ebnp/model.hpp"
#include "ebnp/npmle.hpp"
#include "ebnp/rules.hpp"

using namespace ebnp;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = dispatch(args, out, err);
  return {status, out.str(), err.str()};
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "ebnp_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string write(const std::string& name, const std::string& body) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << body;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string estimates_csv(const Dataset& data, const MeanVector& mu) {
  std::string s = "z,mu_hat\n";
  for (std::size_t i = 0; i < data.size(); ++i) s += format_double(data[i]) + "," + format_double(mu[i]) + "\n";
  return s;
}

}  // namespace

TEST_CASE("help and version") {
  CHECK(run({"--version"}).status == kExitOk);
  CHECK(run({"--version"}).out == "0.1.0\n");
  const auto h = run({"--help"});
  CHECK(h.status == kExitOk);
  CHECK(h.out.find("denoise") != std::string::npos);
}

TEST_CASE("usage errors exit 2 with distinct one-line messages") {
  const std::string z = write("z3.csv", "z\n1\n2\n3\n");
  const auto unknown = run({"frobnicate"});
  CHECK(unknown.status == kExitUsage);
  CHECK(unknown.err.find("unknown subcommand") != std::string::npos);

  const auto conflict = run({"denoise", "--input", z, "--alpha-fixed", "1", "--alpha-shape", "2"});
  CHECK(conflict.status == kExitUsage);
  CHECK(conflict.err.find("excludes") != std::string::npos);

  const auto none = run({});
  CHECK(none.status == kExitUsage);

  const auto missing = run({"denoise", "--method", "oracle", "--input", z});
  CHECK(missing.status == kExitUsage);
  CHECK(missing.err.find("--truth") != std::string::npos);

  const auto method = run({"denoise", "--method", "mle", "--input", z});
  CHECK(method.status == kExitUsage);

  for (const auto* r : {&unknown, &conflict, &missing}) {
    CHECK(r->err.find('\n') == r->err.size() - 1);
  }
  CHECK(unknown.err != conflict.err);
}

TEST_CASE("malformed csv is a runtime error") {
  const std::string bad_cell = write("bad_cell.csv", "z\n1\nabc\n");
  const std::string bad_header = write("bad_header.csv", "x\n1\n");
  const auto a = run({"denoise", "--method", "jsplus", "--input", bad_cell});
  CHECK(a.status == kExitRuntime);
  CHECK(a.err.find("non-numeric") != std::string::npos);
  const auto b = run({"denoise", "--method", "jsplus", "--input", bad_header});
  CHECK(b.status == kExitRuntime);
  CHECK(b.err.find("header") != std::string::npos);
  CHECK(a.err != b.err);
  CHECK(run({"denoise", "--input", (scratch() / "absent.csv").string()}).status == kExitRuntime);
}

TEST_CASE("bnp denoise is deterministic given the seed") {
  const std::string z = write("zb.csv", "z\n0.5\n-1\n3\n7.5\n0\n");
  const std::string o1 = (scratch() / "mu1.csv").string();
  const std::string o2 = (scratch() / "mu2.csv").string();
  const std::vector<std::string> common{"denoise", "--method", "bnp", "--input", z,
                                        "--seed", "7", "--burnin", "50", "--sweeps", "500"};
  auto a1 = common, a2 = common;
  a1.insert(a1.end(), {"--output", o1});
  a2.insert(a2.end(), {"--output", o2});
  REQUIRE(run(a1).status == kExitOk);
  REQUIRE(run(a2).status == kExitOk);
  CHECK(slurp(o1) == slurp(o2));

  DpConfig cfg;
  cfg.seed = 7;
  cfg.burn_in_sweeps = 50;
  cfg.sample_sweeps = 500;
  const Dataset data = read_dataset_csv_file(z);
  CHECK(slurp(o1) == estimates_csv(data, estimate(data, cfg).mean));
}

TEST_CASE("the binary behaves like dispatch") {
  const std::string z = write("zbin.csv", "z\n0.5\n-1\n3\n");
  const std::string o1 = (scratch() / "bin1.csv").string();
  const std::string o2 = (scratch() / "bin2.csv").string();
  const std::string cmd = std::string(EBNP_CLI_PATH) + " denoise --method bnp --input " + z +
                          " --seed 7 --sweeps 300 --burnin 30 --output ";
  CHECK(std::system((cmd + o1).c_str()) == 0);
  CHECK(std::system((cmd + o2).c_str()) == 0);
  CHECK(slurp(o1) == slurp(o2));
  CHECK(run({"denoise", "--method", "bnp", "--input", z, "--seed", "7", "--sweeps", "300",
             "--burnin", "30"}).out == slurp(o1));
  const int status = std::system((std::string(EBNP_CLI_PATH) + " nonsense 2>/dev/null").c_str());
  CHECK(WEXITSTATUS(status) == kExitUsage);
}

TEST_CASE("npmle, oracle and james-stein adapters reproduce the library") {
  const std::string zpath = write("zn.csv", "z\n-3.1\n-2.7\n0.2\n2.9\n3.3\n4.1\n");
  const std::string tpath = write("truth.csv", "z\n-3\n-3\n0\n3\n3\n3\n");
  const std::string gpath = (scratch() / "g.csv").string();
  const Dataset data = read_dataset_csv_file(zpath);

  const auto n = run({"denoise", "--method", "npmle", "--input", zpath, "--grid", "200",
                      "--support-bound", "4", "--prior-out", gpath});
  REQUIRE(n.status == kExitOk);
  NpmleConfig cfg;
  cfg.grid_atoms = 200;
  cfg.support_bound = 4.0;
  const auto f = fit(data, cfg);
  CHECK(n.out == estimates_csv(data, separable_apply(f.measure, data)));
  std::ostringstream g;
  write_measure_csv(g, f.measure);
  CHECK(slurp(gpath) == g.str());

  const auto o = run({"denoise", "--method", "oracle", "--input", zpath, "--truth", tpath});
  REQUIRE(o.status == kExitOk);
  CHECK(o.out == estimates_csv(data, oracle_rule({-3, -3, 0, 3, 3, 3}, data)));

  const auto j = run({"denoise", "--method", "jsplus", "--input", zpath});
  REQUIRE(j.status == kExitOk);
  CHECK(j.out == estimates_csv(data, james_stein(data, true)));

  const std::string two = write("ztwo.csv", "z\n1\n2\n");
  const auto refused = run({"denoise", "--method", "js", "--input", two});
  CHECK(refused.status == kExitRuntime);
  CHECK(refused.err.find("warning") != std::string::npos);
}

TEST_CASE("diagnose") {
  const std::string a = write("a.csv", "atom,weight\n0,0.5\n2,0.5\n");
  const std::string b = write("b.csv", "atom,weight\n1,1\n");
  const auto same = run({"diagnose", "--g", a, "--q", a});
  REQUIRE(same.status == kExitOk);
  CHECK(same.out == "hellinger,kl,fisher\n0,0,0\n");
  const auto diff = run({"diagnose", "--g", a, "--q", b});
  REQUIRE(diff.status == kExitOk);
  const auto g = read_measure_csv_file(a);
  const auto q = read_measure_csv_file(b);
  CHECK(diff.out == "hellinger,kl,fisher\n" + format_double(hellinger(g, q)) + "," +
                        format_double(kl(g, q)) + "," + format_double(fisher_divergence(g, q)) + "\n");
}

TEST_CASE("exact") {
  const std::string z2 = write("z2.csv", "z\n-0.2\n0.2\n");
  const auto r = run({"exact", "--input", z2, "--alpha", "1.0"});
  REQUIRE(r.status == kExitOk);
  const Dataset data = read_dataset_csv_file(z2);
  CHECK(r.out == estimates_csv(data, exact_posterior_mean(data, 1.0, UniformBase{})));

  std::string big = "z\n";
  for (int i = 0; i < 13; ++i) big += std::to_string(i) + "\n";
  const auto refused = run({"exact", "--input", write("z13.csv", big)});
  CHECK(refused.status == kExitUsage);
  CHECK(refused.err.find("refuses n = 13") != std::string::npos);
  CHECK(run({"exact", "--input", z2, "--base", "3,1"}).status == kExitUsage);
}

TEST_CASE("simulate") {
  const std::string cfg = write("sim.txt",
                                "[scenario]\nn = 60\nn_nonzero = 6\nmu = 4\nreplicates = 3\n"
                                "methods = oracle, js\n");
  const std::string out = (scratch() / "results.csv").string();
  const auto r = run({"simulate", "--config", cfg, "--out", out, "--workers", "2"});
  REQUIRE(r.status == kExitOk);
  CHECK(r.out.find("| # nonzero | 6 |") != std::string::npos);
  std::ifstream in(out);
  const auto rows = bench::parse_report_csv(in);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == "oracle");
  CHECK(rows[0].replicates == 3);

  const auto full = run({"simulate", "--config", cfg, "--out", out, "--full"});
  REQUIRE(full.status == kExitOk);
  std::ifstream in2(out);
  CHECK(bench::parse_report_csv(in2)[0].replicates == bench::kFullReplicates);

  const std::string broken = write("broken.txt", "[scenario]\nwhatever = 1\n");
  const auto e = run({"simulate", "--config", broken, "--out", out});
  CHECK(e.status == kExitRuntime);
  CHECK(e.err.find("unknown key") != std::string::npos);
}
