#include "lowprev/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace lowprev {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Problem files

namespace {

Gamble gamble_from_json(const json& j, std::size_t omega, const std::string& where) {
  if (!j.is_array()) throw FormatError(where + ": expected an array of numbers");
  if (j.size() != omega) {
    throw FormatError(where + ": has " + std::to_string(j.size()) + " values, omega is " + std::to_string(omega));
  }
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw FormatError(where + ": non-numeric entry");
    v.push_back(x.get<double>());
  }
  return Gamble(v);
}

template <class T>
std::optional<T> optional_field(const json& meta, const char* key) {
  if (!meta.contains(key) || meta.at(key).is_null()) return std::nullopt;
  return meta.at(key).get<T>();
}

}  // namespace

json problem_to_json(const DecisionProblem& problem, const ProblemMeta& meta) {
  json j;
  j["omega"] = problem.prevision.omega_size();
  j["lower_prevision"] = json::array();
  for (const auto& a : problem.prevision.assessments()) {
    j["lower_prevision"].push_back({{"gamble", a.gamble.to_vector()}, {"bound", a.lower_bound}});
  }
  j["gambles"] = json::array();
  for (const auto& g : problem.gambles) j["gambles"].push_back(g.to_vector());
  json m;
  m["m"] = meta.m ? json(*meta.m) : json(nullptr);
  m["n"] = meta.n ? json(*meta.n) : json(nullptr);
  m["seed"] = meta.seed ? json(*meta.seed) : json(nullptr);
  if (meta.maximal_indices) m["maximal_indices"] = *meta.maximal_indices;
  if (meta.interval_dominant_indices) m["interval_dominant_indices"] = *meta.interval_dominant_indices;
  j["meta"] = std::move(m);
  return j;
}

ProblemFile problem_from_json(const json& j) {
  try {
    if (!j.is_object()) throw FormatError("problem must be a JSON object");
    const auto omega_raw = j.at("omega").get<long long>();
    if (omega_raw < 1) throw FormatError("omega must be positive");
    const auto omega = static_cast<std::size_t>(omega_raw);

    std::vector<Assessment> assessments;
    const auto& lp = j.at("lower_prevision");
    if (!lp.is_array()) throw FormatError("lower_prevision must be an array");
    for (std::size_t i = 0; i < lp.size(); ++i) {
      const auto& a = lp[i];
      assessments.push_back({gamble_from_json(a.at("gamble"), omega, "lower_prevision[" + std::to_string(i) + "]"),
                             a.at("bound").get<double>()});
    }
    std::vector<Gamble> gambles;
    const auto& gs = j.at("gambles");
    if (!gs.is_array() || gs.empty()) throw FormatError("gambles must be a nonempty array");
    for (std::size_t i = 0; i < gs.size(); ++i) {
      gambles.push_back(gamble_from_json(gs[i], omega, "gambles[" + std::to_string(i) + "]"));
    }

    ProblemMeta meta;
    if (j.contains("meta") && j.at("meta").is_object()) {
      const auto& m = j.at("meta");
      meta.m = optional_field<std::size_t>(m, "m");
      meta.n = optional_field<std::size_t>(m, "n");
      meta.seed = optional_field<std::uint64_t>(m, "seed");
      meta.maximal_indices = optional_field<IndexSet>(m, "maximal_indices");
      meta.interval_dominant_indices = optional_field<IndexSet>(m, "interval_dominant_indices");
    }
    return {DecisionProblem(LowerPrevision(omega, std::move(assessments)), std::move(gambles)), std::move(meta)};
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed problem: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("malformed problem: ") + e.what());
  }
}

ProblemFile read_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return problem_from_json(j);
}

void write_problem(const std::filesystem::path& path, const DecisionProblem& problem, const ProblemMeta& meta) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << problem_to_json(problem, meta).dump(1) << '\n';
}

// ---------------------------------------------------------------------------
// Results

std::string to_csv_row(const RunRecord& r) {
  std::ostringstream os;
  os << r.option_label << ',' << r.k << ',' << r.m_max << ',' << r.n_id << ',' << r.omega_size << ',' << r.dom_size
     << ',' << r.algorithm << ',' << (r.with_id_prefilter ? 1 : 0) << ',' << r.replicate << ',' << r.seed << ','
     << std::fixed << std::setprecision(4) << r.wall_time_ms << ',' << r.lp_solve_count << ','
     << r.total_ipm_iterations << ',' << r.maximal_found << ',' << (r.verified ? 1 : 0);
  return os.str();
}

RunRecord parse_csv_row(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (f.size() != 15 || f[0].size() != 1) throw FormatError("bad results row: " + line);
  try {
    RunRecord r;
    r.option_label = f[0][0];
    r.k = std::stoul(f[1]);
    r.m_max = std::stoul(f[2]);
    r.n_id = std::stoul(f[3]);
    r.omega_size = std::stoul(f[4]);
    r.dom_size = std::stoul(f[5]);
    r.algorithm = f[6];
    r.with_id_prefilter = f[7] == "1";
    r.replicate = std::stoul(f[8]);
    r.seed = std::stoull(f[9]);
    r.wall_time_ms = std::stod(f[10]);
    r.lp_solve_count = std::stol(f[11]);
    r.total_ipm_iterations = std::stol(f[12]);
    r.maximal_found = std::stoul(f[13]);
    r.verified = f[14] == "1";
    return r;
  } catch (const std::logic_error&) {
    throw FormatError("bad results row: " + line);
  }
}

CsvAppender::CsvAppender(const std::filesystem::path& path, std::string header) : path_(path) {
  std::error_code ec;
  const bool empty = !std::filesystem::exists(path_, ec) || std::filesystem::file_size(path_, ec) == 0;
  if (empty) {
    std::ofstream out(path_, std::ios::app);
    if (!out) throw FormatError("cannot write " + path_.string());
    out << header << '\n';
  }
}

void CsvAppender::append(const std::string& row) {
  std::ofstream out(path_, std::ios::app);
  if (!out) throw FormatError("cannot write " + path_.string());
  out << row << '\n';
}

SampleSummary summarize(std::vector<double> xs) {
  SampleSummary s;
  s.reps = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    s.ci_halfwidth = 1.96 * s.sd / std::sqrt(static_cast<double>(xs.size()));
  }
  std::sort(xs.begin(), xs.end());
  const std::size_t h = xs.size() / 2;
  s.median = xs.size() % 2 ? xs[h] : 0.5 * (xs[h - 1] + xs[h]);
  return s;
}

std::string variant_name(const RunRecord& r) { return r.algorithm + (r.with_id_prefilter ? "+id" : ""); }

std::string to_csv_row(const GridSummary& s) {
  std::ostringstream os;
  os << s.option_label << ',' << s.k << ',' << s.omega_size << ',' << s.dom_size << ',' << s.variant << ','
     << s.time_ms.reps << ',' << std::fixed << std::setprecision(4) << s.time_ms.mean << ',' << s.time_ms.ci_halfwidth
     << ',' << s.time_ms.median << ',' << std::setprecision(2) << s.mean_lp_count;
  return os.str();
}

std::vector<GridSummary> summarize_records(const std::vector<RunRecord>& records) {
  using Key = std::tuple<char, std::size_t, std::size_t, std::size_t, std::string>;
  std::vector<Key> order;
  std::map<Key, std::pair<std::vector<double>, double>> groups;
  for (const auto& r : records) {
    const Key key{r.option_label, r.k, r.omega_size, r.dom_size, variant_name(r)};
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.first.push_back(r.wall_time_ms);
    it->second.second += static_cast<double>(r.lp_solve_count);
  }
  std::vector<GridSummary> out;
  for (const auto& key : order) {
    const auto& [times, lp_total] = groups.at(key);
    GridSummary s;
    std::tie(s.option_label, s.k, s.omega_size, s.dom_size, s.variant) = key;
    s.time_ms = summarize(times);
    s.mean_lp_count = lp_total / static_cast<double>(times.size());
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Benchmark grid

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string Variant::name() const {
  if (!alg) return "id_only";
  return std::string(to_string(*alg)) + (with_id ? "+id" : "");
}

std::vector<Variant> all_variants() {
  std::vector<Variant> v;
  for (auto a : {MaxAlgorithm::Alg1, MaxAlgorithm::Alg2, MaxAlgorithm::Alg3, MaxAlgorithm::Alg4}) {
    v.push_back({a, false});
    v.push_back({a, true});
  }
  v.push_back({std::nullopt, false});
  return v;
}

BenchConfig BenchConfig::desk() { return {}; }

BenchConfig BenchConfig::paper() {
  BenchConfig c;
  c.ks = {16, 64, 256};
  c.omegas = {4, 64};
  c.doms = {4, 16, 64};
  c.reps = 100;
  return c;
}

namespace {

std::uint64_t cell_seed(std::uint64_t master, const CellKey& c, std::size_t replicate) {
  std::uint64_t s = derive_seed(master, c.k);
  s = derive_seed(s, c.omega_size);
  s = derive_seed(s, c.dom_size);
  s = derive_seed(s, static_cast<std::uint64_t>(c.option_label));
  return derive_seed(s, replicate);
}

std::string describe(const IndexSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "}";
}

}  // namespace

std::vector<RunRecord> run_instance(const ScenarioSpec& spec, std::size_t replicate, const BenchConfig& cfg) {
  const GeneratedSet gen = generate_problem(spec, cfg.generation);
  const IndexSet true_max = maximal_bruteforce(gen.problem, cfg.oracle);
  const IndexSet true_id = interval_dominant_bruteforce(gen.problem, cfg.oracle);
  if (true_max != gen.claimed_maximal || true_id != gen.claimed_interval_dominant) {
    throw VerificationError("generator claims maximal " + describe(gen.claimed_maximal) + " and interval dominant " +
                            describe(gen.claimed_interval_dominant) + ", oracle finds " + describe(true_max) +
                            " and " + describe(true_id));
  }

  // The cached primal start is per prevision and stays outside the timed region.
  const NaturalExtension ne(gen.problem.prevision, cfg.solver);
  std::vector<RunRecord> rows;
  for (const auto& v : cfg.variants) {
    RunRecord r;
    r.option_label = spec.option_label;
    r.k = spec.k;
    r.m_max = spec.m_max;
    r.n_id = spec.n_id;
    r.omega_size = spec.omega_size;
    r.dom_size = spec.dom_size;
    r.algorithm = v.alg ? to_string(*v.alg) : "id_only";
    r.with_id_prefilter = v.with_id && v.alg;
    r.replicate = replicate;
    r.seed = spec.seed;

    IndexSet found;
    AlgorithmStats stats;
    if (!v.alg) {
      auto id = interval_dominant(ne, gen.problem.gambles);
      found = id.indices;
      stats = id.stats;
      r.verified = found == true_id;
    } else if (v.with_id) {
      auto [sets, st] = maximal_with_id_prefilter(ne, gen.problem.gambles, *v.alg);
      found = sets.maximal_indices;
      stats = st;
      r.verified = found == true_max && sets.interval_dominant_indices == true_id;
    } else {
      auto mx = find_maximal(ne, gen.problem.gambles, *v.alg);
      found = mx.indices;
      stats = mx.stats;
      r.verified = found == true_max;
    }
    r.wall_time_ms = stats.wall_time_ms();
    r.lp_solve_count = stats.lp_solve_count;
    r.total_ipm_iterations = stats.total_ipm_iterations;
    r.maximal_found = found.size();
    if (!r.verified) {
      throw VerificationError(v.name() + " returned " + describe(found) + ", oracle finds " +
                              describe(v.alg ? true_max : true_id));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

BenchReport run_bench(const BenchConfig& cfg, const std::function<void(const std::vector<RunRecord>&)>& on_rows,
                      std::ostream* log) {
  std::vector<CellKey> cells;
  for (std::size_t k : cfg.ks) {
    const auto table = table_options(k);
    for (std::size_t omega : cfg.omegas) {
      for (std::size_t dom : cfg.doms) {
        for (const auto& o : table) {
          if (cfg.options.find(o.label) != std::string::npos) cells.push_back({k, omega, dom, o.label});
        }
      }
    }
  }

  struct CellResult {
    std::vector<RunRecord> rows;
    std::optional<CellFailure> failure;
    bool done = false;
  };
  std::vector<CellResult> results(cells.size());
  std::mutex mu;
  std::size_t next_emit = 0;
  BenchReport report;

  auto run_cell = [&](std::size_t c) {
    const CellKey& key = cells[c];
    const TableOption opt = table_option(key.k, key.option_label);
    CellResult res;
    for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
      ScenarioSpec spec{key.omega_size, key.dom_size, key.k, opt.m, opt.n, key.option_label,
                        cell_seed(cfg.master_seed, key, rep)};
      try {
        auto rows = run_instance(spec, rep, cfg);
        res.rows.insert(res.rows.end(), rows.begin(), rows.end());
      } catch (const std::exception& e) {
        res.failure = CellFailure{key, rep, e.what()};
        break;
      }
    }
    std::lock_guard<std::mutex> lock(mu);
    if (log) {
      *log << "cell k=" << key.k << " omega=" << key.omega_size << " dom=" << key.dom_size << " option "
           << key.option_label << ": " << (res.failure ? "FAILED (" + res.failure->message + ")" : "ok") << '\n';
    }
    res.done = true;
    results[c] = std::move(res);
    while (next_emit < results.size() && results[next_emit].done) {
      auto& r = results[next_emit];
      if (on_rows && !r.rows.empty()) on_rows(r.rows);
      report.records.insert(report.records.end(), r.rows.begin(), r.rows.end());
      if (r.failure) report.failures.push_back(*r.failure);
      r.rows.clear();
      ++next_emit;
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(cells.size())));
  if (jobs <= 1) {
    for (std::size_t c = 0; c < cells.size(); ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < cells.size(); c = next++) run_cell(c);
      });
    }
    for (auto& th : pool) th.join();
  }
  return report;
}

std::vector<std::filesystem::path> write_plot_data(const std::vector<GridSummary>& summary,
                                                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::vector<const GridSummary*>> panels;
  for (const auto& s : summary) panels[{s.k, s.omega_size, s.dom_size}].push_back(&s);

  std::vector<std::filesystem::path> written;
  for (const auto& [key, rows] : panels) {
    const auto& [k, omega, dom] = key;
    const auto path = dir / ("plot_k" + std::to_string(k) + "_omega" + std::to_string(omega) + "_dom" +
                             std::to_string(dom) + ".tsv");
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    out << "option\talgorithm\tmean_ms\tci_halfwidth\n" << std::fixed << std::setprecision(4);
    for (const auto* s : rows) {
      out << s->option_label << '\t' << s->variant << '\t' << s->time_ms.mean << '\t' << s->time_ms.ci_halfwidth
          << '\n';
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace lowprev
