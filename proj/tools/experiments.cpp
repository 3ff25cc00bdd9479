#include "experiments.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "csv.hpp"
#include "wskde/capi.h"

namespace wskde_cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct TestFnDeleter {
  void operator()(wskde_testfn* p) const { wskde_testfn_free(p); }
};
struct NoiseDeleter {
  void operator()(wskde_noise* p) const { wskde_noise_free(p); }
};
struct RngDeleter {
  void operator()(wskde_rng* p) const { wskde_rng_free(p); }
};
struct GridDeleter {
  void operator()(wskde_grid* p) const { wskde_grid_free(p); }
};
struct BoResultDeleter {
  void operator()(wskde_bo_result* p) const { wskde_bo_result_free(p); }
};

using TestFnPtr = std::unique_ptr<wskde_testfn, TestFnDeleter>;
using NoisePtr = std::unique_ptr<wskde_noise, NoiseDeleter>;
using RngPtr = std::unique_ptr<wskde_rng, RngDeleter>;
using GridPtr = std::unique_ptr<wskde_grid, GridDeleter>;
using BoResultPtr = std::unique_ptr<wskde_bo_result, BoResultDeleter>;

[[noreturn]] void lib_error(const std::string& context) {
  throw ConfigError(context + ": " + wskde_last_error());
}

TestFnPtr make_testfn(const ExperimentConfig& cfg) {
  TestFnPtr tf(wskde_testfn_new(cfg.tf_a, cfg.tf_b));
  if (!tf) lib_error("test function");
  return tf;
}

NoisePtr make_noise(const NoiseSpec& spec) {
  wskde_noise* nm = nullptr;
  if (spec.type == "bernoulli")
    nm = wskde_noise_new_bernoulli();
  else if (spec.type == "beta")
    nm = wskde_noise_new_beta(spec.concentration);
  else
    nm = wskde_noise_new_mode_fraction(spec.pose_probs.data(),
                                       spec.pose_probs.size(), spec.parts);
  if (!nm) lib_error("noise model");
  return NoisePtr(nm);
}

wskde_estimator_kind kind_of(const std::string& name) {
  return name == "nakde" ? WSKDE_EST_NAKDE : WSKDE_EST_WSKDE;
}

std::vector<std::string> estimator_names(const ExperimentConfig& cfg) {
  if (cfg.estimator == "both") return {"wskde", "nakde"};
  return {cfg.estimator};
}

/// Runs body(r) for every replication index on `jobs` worker threads. The
/// per-index work writes only to its own result slot, so the schedule cannot
/// influence the assembled output.
void parallel_replications(std::uint64_t n, unsigned jobs,
                           const std::function<void(std::uint64_t)>& body) {
  if (jobs == 0) jobs = std::thread::hardware_concurrency();
  if (jobs == 0) jobs = 1;
  jobs = static_cast<unsigned>(
      std::min<std::uint64_t>(jobs, std::max<std::uint64_t>(n, 1)));
  if (jobs <= 1) {
    for (std::uint64_t r = 0; r < n; ++r) body(r);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const std::uint64_t r = next.fetch_add(1);
        if (r >= n) return;
        try {
          body(r);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

fs::path prepare_out_dir(const ExperimentConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);
  return dir;
}

void write_metadata(const fs::path& dir, const ExperimentConfig& cfg,
                    const std::vector<std::uint64_t>& derived_seeds,
                    const std::vector<double>& per_rep_sec, double total_sec,
                    json extra = json::object()) {
  json meta;
  meta["artifact"] = {{"name", "wskde"}, {"version", wskde_version()}};
  meta["rng"] = wskde_rng_algorithm();
  meta["config_digest"] = cfg.digest;
  meta["config"] = cfg.effective;
  meta["derived_seeds"] = derived_seeds;
  meta["wall_clock"] = {{"total_sec", total_sec},
                        {"per_replication_sec", per_rep_sec}};
  for (auto& [key, value] : extra.items()) meta[key] = value;

  std::ofstream out(dir / "metadata.json", std::ios::binary);
  if (!out) throw IoError("cannot create metadata.json");
  out << meta.dump(2) << "\n";
  if (!out) throw IoError("write failure on metadata.json");
}

std::vector<std::uint64_t> derive_all(std::uint64_t base, std::uint64_t n) {
  std::vector<std::uint64_t> seeds(n);
  for (std::uint64_t r = 0; r < n; ++r) seeds[r] = wskde_derive_seed(base, r);
  return seeds;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

void run_coverage(const ExperimentConfig& cfg, unsigned jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = prepare_out_dir(cfg);
  const TestFnPtr tf = make_testfn(cfg);
  const NoisePtr noise = make_noise(cfg.noise);
  const std::vector<std::string> estimators = estimator_names(cfg);
  const std::vector<std::uint64_t> seeds = derive_all(cfg.seed, cfg.replications);

  const double lo = cfg.lo[0], hi = cfg.hi[0];
  const double spacing = (hi - lo) / static_cast<double>(cfg.eval_points - 1);
  const double h = cfg.bandwidth[0];

  // coverage[e][c][r]
  std::vector<std::vector<std::vector<double>>> results(
      estimators.size(),
      std::vector<std::vector<double>>(cfg.checkpoints.size(),
                                       std::vector<double>(cfg.replications)));
  std::vector<double> rep_sec(cfg.replications, 0.0);

  parallel_replications(cfg.replications, jobs, [&](std::uint64_t r) {
    const auto rep_start = std::chrono::steady_clock::now();
    RngPtr rng(wskde_rng_new(seeds[r]));
    if (!rng) lib_error("rng");
    GridPtr grid(
        wskde_grid_new(1, &lo, &hi, &spacing, &h, cfg.z, WSKDE_EST_WSKDE));
    if (!grid) lib_error("evaluation grid");

    std::size_t next_cp = 0;
    for (std::uint64_t n = 1; n <= cfg.samples; ++n) {
      const double x = lo + wskde_rng_next_double(rng.get()) * (hi - lo);
      double s = 0.0;
      if (wskde_testfn_eval(tf.get(), x, &s) != WSKDE_OK)
        lib_error("ground truth");
      double y = 0.0;
      if (wskde_noise_draw(noise.get(), s, rng.get(), &y) != WSKDE_OK)
        lib_error("noise draw");
      if (wskde_grid_ingest(grid.get(), &x, y) != WSKDE_OK)
        lib_error("ingest");
      while (next_cp < cfg.checkpoints.size() &&
             cfg.checkpoints[next_cp] == n) {
        for (std::size_t e = 0; e < estimators.size(); ++e) {
          const double cov =
              wskde_coverage(grid.get(), tf.get(), kind_of(estimators[e]));
          if (std::isnan(cov)) lib_error("coverage");
          results[e][next_cp][r] = cov;
        }
        ++next_cp;
      }
    }
    rep_sec[r] = seconds_since(rep_start);
  });

  CsvWriter csv((dir / "coverage.csv").string(), cfg.digest, wskde_version(),
                wskde_rng_algorithm());
  csv.line("estimator,n_samples,mean_coverage,std_coverage");
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    for (std::size_t c = 0; c < cfg.checkpoints.size(); ++c) {
      double mean = 0.0, stddev = 0.0;
      if (wskde_aggregate(results[e][c].data(), results[e][c].size(), &mean,
                          &stddev) != WSKDE_OK)
        lib_error("aggregate");
      csv.row(estimators[e], fmt(cfg.checkpoints[c]), fmt(mean), fmt(stddev));
    }
  }

  json extra;
  extra["sample_placement"] = "uniform-random";
  extra["coverage_axis"] = "total-samples";
  write_metadata(dir, cfg, seeds, rep_sec, seconds_since(t0), extra);
}

namespace {

struct GridRow {
  double x;
  double m_h;
  double n_eff;
  double center;
  double sigma;
  int pruned;
};

struct BoRep {
  std::vector<wskde_bo_trace_row> trace;
  std::vector<GridRow> grid_rows;
  wskde_peak_label label;
};

std::vector<GridRow> snapshot_grid(const wskde_grid* grid) {
  std::vector<GridRow> rows(wskde_grid_size(grid));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    wskde_estimate e;
    if (wskde_grid_estimate(grid, i, &e) != WSKDE_OK) lib_error("estimate");
    double x = 0.0;
    if (wskde_grid_point(grid, i, &x) != WSKDE_OK) lib_error("grid point");
    rows[i] = GridRow{x,     e.kde_mean,         e.n_eff,
                      e.center, e.half_width, wskde_grid_pruned(grid, i)};
  }
  return rows;
}

}  // namespace

void run_bo(const ExperimentConfig& cfg, unsigned jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = prepare_out_dir(cfg);
  const TestFnPtr tf = make_testfn(cfg);
  const NoisePtr noise = make_noise(cfg.noise);
  const std::vector<std::string> estimators = estimator_names(cfg);
  const std::vector<std::uint64_t> seeds = derive_all(cfg.seed, cfg.replications);
  const double s_max = wskde_testfn_max(tf.get());

  // results[e][r]
  std::vector<std::vector<BoRep>> results(estimators.size());
  for (auto& v : results) v.resize(cfg.replications);
  std::vector<double> rep_sec(cfg.replications, 0.0);

  parallel_replications(cfg.replications, jobs, [&](std::uint64_t r) {
    const auto rep_start = std::chrono::steady_clock::now();
    for (std::size_t e = 0; e < estimators.size(); ++e) {
      BoRep& rep = results[e][r];
      if (cfg.budget == 0) {
        // Degenerate run: emit the untouched grid.
        const double spacing =
            cfg.spacing.empty() ? cfg.bandwidth[0] : cfg.spacing[0];
        GridPtr grid(wskde_grid_new(1, &cfg.lo[0], &cfg.hi[0], &spacing,
                                    &cfg.bandwidth[0], cfg.z,
                                    kind_of(estimators[e])));
        if (!grid) lib_error("grid");
        rep.grid_rows = snapshot_grid(grid.get());
        if (wskde_attribute_peak(grid.get(), tf.get(), &rep.label) != WSKDE_OK)
          lib_error("peak attribution");
        continue;
      }

      wskde_bo_config bo;
      bo.lo = cfg.lo[0];
      bo.hi = cfg.hi[0];
      bo.bandwidth = cfg.bandwidth[0];
      bo.spacing = cfg.spacing.empty() ? 0.0 : cfg.spacing[0];
      bo.z = cfg.z;
      bo.budget = cfg.budget;
      bo.stop_half_width = cfg.stop_half_width;
      bo.estimator = kind_of(estimators[e]);
      bo.seed = seeds[r];

      wskde_bo_result* raw = nullptr;
      if (wskde_bo_run(&bo, tf.get(), noise.get(), &raw) != WSKDE_OK)
        lib_error("optimization run");
      BoResultPtr res(raw);

      const std::size_t iterations = wskde_bo_result_iterations(res.get());
      rep.trace.resize(iterations);
      for (std::size_t i = 0; i < iterations; ++i) {
        if (wskde_bo_result_trace_row(res.get(), i, &rep.trace[i]) != WSKDE_OK)
          lib_error("trace row");
      }
      const wskde_grid* grid = wskde_bo_result_grid(res.get());
      rep.grid_rows = snapshot_grid(grid);
      if (wskde_attribute_peak(grid, tf.get(), &rep.label) != WSKDE_OK)
        lib_error("peak attribution");
    }
    rep_sec[r] = seconds_since(rep_start);
  });

  CsvWriter trace((dir / "trace.csv").string(), cfg.digest, wskde_version(),
                  wskde_rng_algorithm());
  trace.line(
      "estimator,replication,iteration,x,y,lcb_max_fraction,i_tot,i_false");
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    for (std::uint64_t r = 0; r < cfg.replications; ++r) {
      const auto& rows = results[e][r].trace;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        trace.row(estimators[e], fmt(r), fmt(static_cast<std::uint64_t>(i + 1)),
                  fmt(rows[i].x), fmt(rows[i].y),
                  fmt(rows[i].lcb_max / s_max), fmt(rows[i].i_tot),
                  fmt(rows[i].i_false));
      }
    }
  }

  CsvWriter grid_csv((dir / "grid_final.csv").string(), cfg.digest,
                     wskde_version(), wskde_rng_algorithm());
  grid_csv.line("estimator,replication,x,m_h,n_h,p_ws,sigma,pruned");
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    for (std::uint64_t r = 0; r < cfg.replications; ++r) {
      for (const GridRow& g : results[e][r].grid_rows) {
        grid_csv.row(estimators[e], fmt(r), fmt(g.x), fmt(g.m_h), fmt(g.n_eff),
                     fmt(g.center), fmt(g.sigma),
                     fmt(static_cast<std::uint64_t>(g.pruned)));
      }
    }
  }

  CsvWriter peaks((dir / "peaks.csv").string(), cfg.digest, wskde_version(),
                  wskde_rng_algorithm());
  peaks.line("estimator,noise,l1,l2,l3,gm");
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    std::uint64_t tally[4] = {0, 0, 0, 0};
    for (std::uint64_t r = 0; r < cfg.replications; ++r)
      ++tally[results[e][r].label];
    peaks.row(estimators[e], cfg.noise.label(), fmt(tally[0]), fmt(tally[1]),
              fmt(tally[2]), fmt(tally[3]));
  }

  write_metadata(dir, cfg, seeds, rep_sec, seconds_since(t0));
}

void run_estimate(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = prepare_out_dir(cfg);
  const std::size_t dim = cfg.dim();

  std::ifstream in(cfg.data_path);
  if (!in) throw IoError("cannot open data file: " + cfg.data_path);

  std::vector<double> spacing =
      cfg.spacing.empty() ? cfg.bandwidth : cfg.spacing;
  GridPtr grid(wskde_grid_new(dim, cfg.lo.data(), cfg.hi.data(),
                              spacing.data(), cfg.bandwidth.data(), cfg.z,
                              kind_of(cfg.estimator)));
  if (!grid) lib_error("query grid");

  std::string line;
  std::size_t line_no = 0;
  std::vector<double> fields;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream row(line);
    fields.clear();
    double v = 0.0;
    while (row >> v) fields.push_back(v);
    if (fields.empty()) continue;  // blank or comment line
    if (fields.size() != dim + 1)
      throw ConfigError("data row " + std::to_string(line_no) + ": expected " +
                        std::to_string(dim + 1) + " numbers");
    const double y = fields[dim];
    if (wskde_grid_ingest(grid.get(), fields.data(), y) != WSKDE_OK)
      throw ConfigError("data row " + std::to_string(line_no) + ": " +
                        wskde_last_error());
  }
  if (wskde_grid_refresh(grid.get()) != WSKDE_OK) lib_error("refresh");

  CsvWriter csv((dir / "estimates.csv").string(), cfg.digest, wskde_version(),
                wskde_rng_algorithm());
  std::string header;
  if (dim == 1) {
    header = "x";
  } else {
    for (std::size_t k = 0; k < dim; ++k)
      header += (k ? ",x" : "x") + std::to_string(k + 1);
  }
  csv.line(header + ",m_h,n_h,p_ws,sigma_ws,lcb,ucb");

  std::vector<double> point(dim, 0.0);
  for (std::size_t i = 0; i < wskde_grid_size(grid.get()); ++i) {
    if (wskde_grid_point(grid.get(), i, point.data()) != WSKDE_OK)
      lib_error("grid point");
    wskde_estimate e;
    if (wskde_grid_estimate(grid.get(), i, &e) != WSKDE_OK)
      lib_error("estimate");
    std::string coords;
    for (std::size_t k = 0; k < dim; ++k) {
      if (k) coords += ',';
      coords += fmt(point[k]);
    }
    csv.row(coords, fmt(e.kde_mean), fmt(e.n_eff), fmt(e.center),
            fmt(e.half_width), fmt(e.lcb), fmt(e.ucb));
  }

  write_metadata(dir, cfg, {}, {}, seconds_since(t0));
}

namespace {

std::string digest_from_comment(const std::string& comment_line,
                                const std::string& file) {
  const std::string tag = "config=";
  const std::size_t pos = comment_line.find(tag);
  if (comment_line.empty() || comment_line[0] != '#' ||
      pos == std::string::npos)
    throw ConfigError(file + ": missing config digest comment");
  std::size_t end = pos + tag.size();
  while (end < comment_line.size() && !std::isspace(comment_line[end])) ++end;
  return comment_line.substr(pos + tag.size(), end - pos - tag.size());
}

}  // namespace

void emit_peak_table(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = prepare_out_dir(cfg);

  struct TableRow {
    std::string noise;
    std::string estimator;
    std::string l1, l2, l3, gm;
  };
  std::vector<TableRow> rows;

  for (const std::string& input : cfg.inputs) {
    const fs::path meta_path = fs::path(input) / "metadata.json";
    const fs::path peaks_path = fs::path(input) / "peaks.csv";
    std::ifstream meta_in(meta_path);
    if (!meta_in)
      throw ConfigError("missing input: " + meta_path.string());
    json meta;
    try {
      meta = json::parse(meta_in);
    } catch (const json::parse_error& e) {
      throw ConfigError(meta_path.string() + ": " + e.what());
    }
    if (!meta.contains("config_digest") || !meta["config_digest"].is_string())
      throw ConfigError(meta_path.string() + ": no config_digest");
    const std::string expected = meta["config_digest"].get<std::string>();

    std::ifstream peaks_in(peaks_path);
    if (!peaks_in)
      throw ConfigError("missing input: " + peaks_path.string());
    std::string line;
    if (!std::getline(peaks_in, line))
      throw ConfigError(peaks_path.string() + ": empty file");
    const std::string found = digest_from_comment(line, peaks_path.string());
    if (found != expected)
      throw ConfigError(peaks_path.string() +
                        ": config digest does not match metadata.json (" +
                        found + " vs " + expected + ")");

    if (!std::getline(peaks_in, line))
      throw ConfigError(peaks_path.string() + ": missing header");
    while (std::getline(peaks_in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::istringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells.size() != 6)
        throw ConfigError(peaks_path.string() + ": malformed row: " + line);
      rows.push_back(
          TableRow{cells[1], cells[0], cells[2], cells[3], cells[4], cells[5]});
    }
  }

  CsvWriter csv((dir / "table.csv").string(), cfg.digest, wskde_version(),
                wskde_rng_algorithm());
  csv.line("noise,estimator,l1,l2,l3,gm");
  for (const TableRow& r : rows)
    csv.row(r.noise, r.estimator, r.l1, r.l2, r.l3, r.gm);

  write_metadata(dir, cfg, {}, {}, seconds_since(t0));
}

}  // namespace wskde_cli
