#include "ebnp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ebnp/rules.hpp"
#include "ebnp/special.hpp"

namespace ebnp::bench {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw std::invalid_argument("scenario: bad value '" + value + "' for key '" + key + "'");
  }
  return out;
}

std::string compact_number(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::kBnp: return "bnp";
    case Method::kNpmle: return "npmle";
    case Method::kOracle: return "oracle";
    case Method::kJs: return "js";
    case Method::kJsPlus: return "jsplus";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "bnp") return Method::kBnp;
  if (name == "npmle") return Method::kNpmle;
  if (name == "oracle") return Method::kOracle;
  if (name == "js") return Method::kJs;
  if (name == "jsplus") return Method::kJsPlus;
  throw std::invalid_argument("unknown method '" + name + "'");
}

void Scenario::validate() const {
  if (n < 1) throw std::invalid_argument("scenario: n must be positive");
  if (n_nonzero > n) throw std::invalid_argument("scenario: n_nonzero exceeds n");
  if (!std::isfinite(signal)) throw std::invalid_argument("scenario: non-finite mu");
  if (replicates < 1) throw std::invalid_argument("scenario: need at least one replicate");
  if (methods.empty()) throw std::invalid_argument("scenario: no methods requested");
  dp.validate();
  npmle.validate();
}

MeanVector Scenario::true_means() const {
  MeanVector mu(n, 0.0);
  std::fill(mu.begin(), mu.begin() + static_cast<std::ptrdiff_t>(n_nonzero), signal);
  return mu;
}

std::string Scenario::id() const {
  return "n=" + std::to_string(n) + "/k=" + std::to_string(n_nonzero) +
         "/mu=" + compact_number(signal);
}

std::vector<Scenario> table1_scenarios(std::size_t replicates, std::uint64_t base_seed) {
  std::vector<Scenario> out;
  for (std::size_t k : {5, 50, 500}) {
    for (double mu : {3.0, 4.0, 5.0, 7.0}) {
      Scenario s;
      s.n = 1000;
      s.n_nonzero = k;
      s.signal = mu;
      s.replicates = replicates;
      s.base_seed = base_seed;
      out.push_back(s);
    }
  }
  return out;
}

const MethodResult* ScenarioResult::find(Method m) const {
  for (const auto& r : methods) {
    if (r.method == m) return &r;
  }
  return nullptr;
}

std::uint64_t replicate_seed(const Scenario& s, std::size_t r) {
  return derive_seed(s.base_seed, {fnv1a(s.id()), static_cast<std::uint64_t>(r)});
}

Dataset draw_replicate(const Scenario& s, std::size_t r) {
  Rng rng(replicate_seed(s, r));
  const MeanVector mu = s.true_means();
  std::vector<double> z(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    z[i] = mu[i] + special::normal_quantile(uniform_open(rng));
  }
  return Dataset(std::move(z));
}

MeanVector run_method(Method m, const Dataset& data, const MeanVector& truth,
                      const Scenario& s, std::uint64_t seed) {
  switch (m) {
    case Method::kBnp: {
      DpConfig cfg = s.dp;
      cfg.seed = seed;
      return estimate(data, cfg).mean;
    }
    case Method::kNpmle: {
      const NpmleFit f = fit(data, s.npmle);
      if (!f.certificate.satisfied) {
        throw std::runtime_error("npmle: KKT certificate not satisfied (sup gradient " +
                                 format_double(f.certificate.sup_gradient) + ")");
      }
      return separable_apply(f.measure, data);
    }
    case Method::kOracle: return oracle_rule(truth, data);
    case Method::kJs: return james_stein(data, false);
    case Method::kJsPlus: return james_stein(data, true);
  }
  throw std::logic_error("run_method: unhandled method");
}

void aggregate(MethodResult& r) {
  double sum = 0.0;
  double secs = 0.0;
  std::size_t ok = 0;
  r.failures = 0;
  for (std::size_t k = 0; k < r.sse.size(); ++k) {
    if (std::isnan(r.sse[k])) {
      ++r.failures;
      continue;
    }
    sum += r.sse[k];
    secs += r.seconds[k];
    ++ok;
  }
  if (ok == 0) {
    r.mean_sse = r.se_sse = r.mean_seconds = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  r.mean_sse = sum / static_cast<double>(ok);
  r.mean_seconds = secs / static_cast<double>(ok);
  double ss = 0.0;
  for (double v : r.sse) {
    if (!std::isnan(v)) ss += (v - r.mean_sse) * (v - r.mean_sse);
  }
  r.se_sse = ok > 1 ? std::sqrt(ss / static_cast<double>(ok - 1) / static_cast<double>(ok))
                    : 0.0;
}

ScenarioResult run_scenario(const Scenario& s, std::size_t workers) {
  s.validate();
  ScenarioResult out;
  out.scenario = s;
  const std::size_t reps = s.replicates;
  for (Method m : s.methods) {
    MethodResult r;
    r.method = m;
    r.sse.assign(reps, std::numeric_limits<double>::quiet_NaN());
    r.seconds.assign(reps, std::numeric_limits<double>::quiet_NaN());
    r.errors.assign(reps, "");
    out.methods.push_back(std::move(r));
  }
  const MeanVector truth = s.true_means();

  const auto run_replicate = [&](std::size_t rep) {
    const Dataset data = draw_replicate(s, rep);
    const std::uint64_t seed = replicate_seed(s, rep);
    for (std::size_t k = 0; k < s.methods.size(); ++k) {
      auto& cell = out.methods[k];
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const MeanVector est =
            run_method(s.methods[k], data, truth, s, derive_seed(seed, {k + 1}));
        const auto t1 = std::chrono::steady_clock::now();
        double sse = 0.0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
          sse += (est[i] - truth[i]) * (est[i] - truth[i]);
        }
        cell.sse[rep] = sse;
        cell.seconds[rep] = std::chrono::duration<double>(t1 - t0).count();
      } catch (const std::exception& e) {
        cell.errors[rep] = e.what();
      }
    }
  };

  const std::size_t pool = std::max<std::size_t>(1, std::min(workers, reps));
  if (pool == 1) {
    for (std::size_t rep = 0; rep < reps; ++rep) run_replicate(rep);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < pool; ++t) {
      threads.emplace_back([&] {
        for (std::size_t rep = next++; rep < reps; rep = next++) run_replicate(rep);
      });
    }
    for (auto& th : threads) th.join();
  }
  for (auto& r : out.methods) aggregate(r);
  return out;
}

std::vector<Scenario> parse_scenarios(std::istream& in) {
  std::vector<Scenario> out;
  std::string line;
  std::size_t line_no = 0;
  bool open = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "[scenario]") {
      out.emplace_back();
      open = true;
      continue;
    }
    if (!open) {
      throw std::invalid_argument("scenario file line " + std::to_string(line_no) +
                                  ": expected '[scenario]'");
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("scenario file line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    Scenario& s = out.back();
    if (key == "n") {
      s.n = parse_number<std::size_t>(key, value);
    } else if (key == "n_nonzero") {
      s.n_nonzero = parse_number<std::size_t>(key, value);
    } else if (key == "mu") {
      s.signal = parse_number<double>(key, value);
    } else if (key == "replicates") {
      s.replicates = parse_number<std::size_t>(key, value);
    } else if (key == "base_seed") {
      s.base_seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "methods") {
      s.methods.clear();
      for (const auto& name : split(value, ',')) s.methods.push_back(parse_method(name));
    } else if (key == "burn_in") {
      s.dp.burn_in_sweeps = parse_number<std::size_t>(key, value);
    } else if (key == "sweeps") {
      s.dp.sample_sweeps = parse_number<std::size_t>(key, value);
    } else if (key == "alpha_fixed") {
      s.dp.alpha_fixed = parse_number<double>(key, value);
    } else if (key == "grid") {
      s.npmle.grid_atoms = parse_number<std::size_t>(key, value);
    } else {
      throw std::invalid_argument("scenario file line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
    }
  }
  for (const auto& s : out) s.validate();
  if (out.empty()) throw std::invalid_argument("scenario file: no scenarios");
  return out;
}

namespace {

std::string render_csv(const std::vector<ScenarioResult>& results) {
  std::ostringstream os;
  os << "n,n_nonzero,mu,replicates,method,mean_sse,se_sse,mean_seconds,failures\n";
  for (const auto& res : results) {
    const auto& s = res.scenario;
    for (const auto& m : res.methods) {
      os << s.n << ',' << s.n_nonzero << ',' << format_double(s.signal) << ','
         << s.replicates << ',' << method_name(m.method) << ','
         << format_double(m.mean_sse) << ',' << format_double(m.se_sse) << ','
         << format_double(m.mean_seconds) << ',' << m.failures << '\n';
    }
  }
  return os.str();
}

std::string fixed(double x, int digits) {
  if (std::isnan(x)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

// Methods x (n_nonzero, mu) grid; one table per distinct n.
std::string render_markdown(const std::vector<ScenarioResult>& results) {
  std::map<std::size_t, std::vector<const ScenarioResult*>> by_n;
  for (const auto& r : results) by_n[r.scenario.n].push_back(&r);
  std::ostringstream os;
  for (const bool timing : {false, true}) {
    for (const auto& [n, group] : by_n) {
      os << (timing ? "Mean wall time in seconds per replicate"
                    : "Unnormalized SSE, mean (MC standard error)")
         << ", n = " << n << "\n\n";
      os << "| # nonzero |";
      for (const auto* r : group) os << ' ' << r->scenario.n_nonzero << " |";
      os << "\n|---|";
      for (std::size_t k = 0; k < group.size(); ++k) os << "---:|";
      os << "\n| mu |";
      for (const auto* r : group) os << ' ' << compact_number(r->scenario.signal) << " |";
      os << '\n';
      std::vector<Method> order;
      for (const auto* r : group) {
        for (const auto& m : r->methods) {
          if (std::find(order.begin(), order.end(), m.method) == order.end()) {
            order.push_back(m.method);
          }
        }
      }
      for (Method m : order) {
        os << "| " << method_name(m) << " |";
        for (const auto* r : group) {
          const MethodResult* cell = r->find(m);
          if (cell == nullptr) {
            os << " |";
          } else if (timing) {
            os << ' ' << fixed(cell->mean_seconds, 3) << " |";
          } else {
            os << ' ' << fixed(cell->mean_sse, 1) << " (" << fixed(cell->se_sse, 1) << ')';
            if (cell->failures > 0) os << " [" << cell->failures << " failed]";
            os << " |";
          }
        }
        os << '\n';
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace

std::string report(const std::vector<ScenarioResult>& results, ReportFormat format) {
  if (results.empty()) throw std::invalid_argument("report: no results");
  return format == ReportFormat::kCsv ? render_csv(results) : render_markdown(results);
}

std::vector<ReportRow> parse_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      trim(line) != "n,n_nonzero,mu,replicates,method,mean_sse,se_sse,mean_seconds,failures") {
    throw std::invalid_argument("report csv: wrong header");
  }
  const auto num = [](const std::string& cell) {
    if (cell == "nan" || cell == "-nan") return std::numeric_limits<double>::quiet_NaN();
    return parse_number<double>("report", cell);
  };
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 9) throw std::invalid_argument("report csv: expected 9 cells");
    ReportRow r;
    r.n = parse_number<std::size_t>("n", cells[0]);
    r.n_nonzero = parse_number<std::size_t>("n_nonzero", cells[1]);
    r.signal = num(cells[2]);
    r.replicates = parse_number<std::size_t>("replicates", cells[3]);
    r.method = cells[4];
    r.mean_sse = num(cells[5]);
    r.se_sse = num(cells[6]);
    r.mean_seconds = num(cells[7]);
    r.failures = parse_number<std::size_t>("failures", cells[8]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace ebnp::bench
