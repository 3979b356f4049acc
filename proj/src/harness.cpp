#include "stickycir/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "stickycir/errors.hpp"

namespace stickycir {

namespace {

namespace fs = std::filesystem;

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) {
    return requested;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs task(i) for i in [0, n) on up to `threads` workers. The first
// exception is rethrown after all workers finish.
template <class Task>
void parallel_for(std::size_t n, std::size_t threads, const Task& task) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      task(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) {
            error = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& th : pool) {
    th.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

fs::path output_dir(const ExperimentConfig& config, const RunOptions& options) {
  fs::path dir = options.out_dir.value_or(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  }
  return dir;
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ConfigError("cannot write " + path.string());
  }
  return out;
}

std::string format_rate(const std::optional<double>& r) { return r ? format_double(*r) : "NA"; }

std::string cell_label(const Cell& c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "potential=%s mu=%g alpha=%g algorithm=%s", c.potential.c_str(), c.mu,
                c.alpha, std::string(to_string(c.algorithm)).c_str());
  return buf;
}

void warn_unbounded_slope(const Cell& cell) {
  if (cell.algorithm != Algorithm::Exact &&
      !Potential::from_tag(parse_potential_tag(cell.potential)).has_linear_slope_growth()) {
    detail::warn(cell.potential + ": G' grows faster than linearly; outside the bounded-drift theory");
  }
}

void report_progress(std::size_t k, std::size_t n, const Cell& cell, const ExperimentRow& row) {
  std::fprintf(stderr, "[%zu/%zu] %s boundary_frac=%.4f se=%.4f theory=%.4f sampling=%.2fs\n", k + 1,
               n, cell_label(cell).c_str(), row.boundary_frac, row.boundary_se, row.theory_atom,
               row.wall_time);
}

template <class Body>
int guarded(const char* command, const Body& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s: %s\n", command, e.what());
    return kExitConfig;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: %s: %s\n", command, e.what());
    return kExitConfig;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "error: %s: %s\n", command, e.what());
    return kExitNumeric;
  }
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) {
    return "NA";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<Cell> expand_grid(const ExperimentConfig& config) {
  std::vector<Cell> cells;
  for (const auto& p : config.potentials) {
    for (double mu : config.mu) {
      for (double alpha : config.alpha) {
        for (const auto& a : config.algorithms) {
          cells.push_back({p, mu, alpha, parse_algorithm(a)});
        }
      }
    }
  }
  return cells;
}

double theory_atom(const ExperimentConfig& config, const std::string& potential, double mu) {
  const auto pot = Potential::from_tag(parse_potential_tag(potential));
  return invariant_measure(config.params(mu, config.alpha.front()), pot).atom_mass();
}

CellResult run_cell(const ExperimentConfig& config, const Cell& cell, std::size_t cell_index,
                    std::uint64_t master_seed, std::size_t threads, TableCache& cache) {
  const auto pot = Potential::from_tag(parse_potential_tag(cell.potential));
  const ModelParams params = config.params(cell.mu, cell.alpha);
  if (cell.algorithm == Algorithm::Exact && pot.tag() != PotentialTag::Zero) {
    throw ConfigError("the exact sampler only supports the zero potential");
  }
  const ResolventTable table = cell.algorithm == Algorithm::Ula
                                   ? cache.get(ula_params(params, pot, parse_ula_boundary(config.ula_boundary)), config.grid_n)
                                   : cache.get(params, config.grid_n);

  CellResult out;
  out.chains.resize(config.n_chains);
  parallel_for(config.n_chains, resolve_threads(threads), [&](std::size_t c) {
    Rng rng(derive_seed(master_seed, {cell_index, c}));
    switch (cell.algorithm) {
      case Algorithm::Exact: out.chains[c] = run_exact(table, config.n_steps, config.x0, rng); break;
      case Algorithm::Mcmc: out.chains[c] = run_mcmc(table, pot, config.n_steps, config.x0, rng); break;
      case Algorithm::Ula: out.chains[c] = run_ula(table, pot, config.n_steps, config.x0, rng); break;
    }
  });
  out.row = summarize(cell.potential, params, cell.algorithm, out.chains, config.n_steps, config.warmup,
                      theory_atom(config, cell.potential, cell.mu));
  return out;
}

void write_theory_csv(std::ostream& os, const ExperimentConfig& config) {
  os << "potential,mu,atom_mass,Z\n";
  for (const auto& p : config.potentials) {
    const auto pot = Potential::from_tag(parse_potential_tag(p));
    for (double mu : config.mu) {
      const auto m = invariant_measure(config.params(mu, config.alpha.front()), pot);
      os << p << ',' << format_double(mu) << ',' << format_double(m.atom_mass()) << ','
         << format_double(m.normalizer()) << '\n';
    }
  }
}

void write_density_csv(std::ostream& os, const ExperimentConfig& config, std::size_t points) {
  os << "potential,mu,y,pi_density\n";
  for (const auto& p : config.potentials) {
    const auto pot = Potential::from_tag(parse_potential_tag(p));
    for (double mu : config.mu) {
      const auto m = invariant_measure(config.params(mu, config.alpha.front()), pot);
      for (std::size_t i = 0; i < points; ++i) {
        const double y = config.hist_upper * static_cast<double>(i + 1) / static_cast<double>(points);
        os << p << ',' << format_double(mu) << ',' << format_double(y) << ','
           << format_double(m.interior_density(y)) << '\n';
      }
    }
  }
}

void write_rows_header(std::ostream& os) {
  os << "potential,mu,alpha,algorithm,boundary_frac,boundary_se,theory_atom,bias,ess_bulk,"
        "accept_int,accept_to0,accept_from0,n_steps,n_chains,warmup\n";
}

void write_row(std::ostream& os, const ExperimentRow& r) {
  os << r.potential << ',' << format_double(r.mu) << ',' << format_double(r.alpha) << ','
     << to_string(r.algorithm) << ',' << format_double(r.boundary_frac) << ','
     << format_double(r.boundary_se) << ',' << format_double(r.theory_atom) << ','
     << format_double(r.bias) << ',' << format_double(r.ess_bulk) << ','
     << format_rate(r.acceptance[0]) << ',' << format_rate(r.acceptance[1]) << ','
     << format_rate(r.acceptance[2]) << ',' << r.n_steps << ',' << r.n_chains << ',' << r.warmup
     << '\n';
}

void write_timing_header(std::ostream& os) {
  os << "potential,mu,alpha,algorithm,wall_time,ess_per_sec\n";
}

void write_timing(std::ostream& os, const ExperimentRow& r) {
  os << r.potential << ',' << format_double(r.mu) << ',' << format_double(r.alpha) << ','
     << to_string(r.algorithm) << ',' << format_double(r.wall_time) << ','
     << format_double(r.ess_per_sec()) << '\n';
}

void write_samples(std::ostream& os, const std::vector<ChainRecord>& chains) {
  os << "chain,step,state\n";
  char buf[64];
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const auto& s = chains[c].states;
    for (std::size_t k = 1; k < s.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g\n", c, k, s[k]);
      os << buf;
    }
  }
}

void write_histogram_csv(std::ostream& os, const ExperimentRow& r, const Histogram& h) {
  for (std::size_t i = 0; i < h.density.size(); ++i) {
    os << r.potential << ',' << format_double(r.mu) << ',' << format_double(r.alpha) << ','
       << to_string(r.algorithm) << ',' << format_double(h.lower_edge(i)) << ','
       << format_double(h.lower_edge(i + 1)) << ',' << format_double(h.density[i]) << '\n';
  }
}

namespace {

constexpr const char* kHistogramHeader = "potential,mu,alpha,algorithm,bin_lo,bin_hi,density\n";

}  // namespace

int cmd_invariant(const ExperimentConfig& config, const RunOptions& options) {
  return guarded("invariant", [&] {
    config.validate();
    const auto dir = output_dir(config, options);
    {
      auto out = open_csv(dir / "theory.csv");
      write_theory_csv(out, config);
    }
    {
      auto out = open_csv(dir / "density.csv");
      write_density_csv(out, config);
    }
    for (double mu : config.mu) {
      const ModelParams p = config.params(mu, config.alpha.front());
      const auto m = invariant_measure(p, Potential::zero());
      const double closed = 1.0 / mu + zero_potential_interior_mass(p);
      std::fprintf(stderr, "info: zero potential mu=%g: Z quadrature=%.15g closed form=%.15g rel.diff=%.2e\n",
                   mu, m.normalizer(), closed, std::abs(m.normalizer() / closed - 1.0));
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_sample(const ExperimentConfig& config, Algorithm algorithm, const RunOptions& options) {
  return guarded("sample", [&] {
    config.validate();
    if (config.mu.size() != 1 || config.alpha.size() != 1 || config.potentials.size() != 1) {
      throw ConfigError("sample commands need exactly one mu, one alpha and one potential");
    }
    const Cell cell{config.potentials.front(), config.mu.front(), config.alpha.front(), algorithm};
    warn_unbounded_slope(cell);
    const auto dir = output_dir(config, options);
    TableCache cache;
    const auto result = run_cell(config, cell, 0, options.seed.value_or(config.master_seed),
                                 options.threads, cache);
    if (!options.no_trace) {
      auto out = open_csv(dir / "samples.csv");
      write_samples(out, result.chains);
    }
    {
      auto out = open_csv(dir / "summary.csv");
      write_rows_header(out);
      write_row(out, result.row);
    }
    {
      auto out = open_csv(dir / "timing.csv");
      write_timing_header(out);
      write_timing(out, result.row);
    }
    {
      auto out = open_csv(dir / "histogram.csv");
      out << kHistogramHeader;
      write_histogram_csv(out, result.row,
                          histogram_density(result.chains, config.warmup, config.hist_bins, config.hist_upper));
    }
    report_progress(0, 1, cell, result.row);
    return static_cast<int>(kExitOk);
  });
}

int cmd_experiment(const ExperimentConfig& config, const RunOptions& options) {
  return guarded("experiment", [&] {
    config.validate_grid();
    const auto cells = expand_grid(config);
    const auto dir = output_dir(config, options);
    const std::uint64_t seed = options.seed.value_or(config.master_seed);
    {
      auto out = open_csv(dir / "theory.csv");
      write_theory_csv(out, config);
    }
    auto results = open_csv(dir / "results.csv");
    auto timing = open_csv(dir / "timing.csv");
    auto hist = open_csv(dir / "histograms.csv");
    write_rows_header(results);
    write_timing_header(timing);
    hist << kHistogramHeader;
    results.flush();

    TableCache cache;
    const std::size_t threads = resolve_threads(options.threads);
    const std::size_t batch = options.parallel_cells ? threads : 1;
    std::size_t failures = 0;
    for (std::size_t first = 0; first < cells.size(); first += batch) {
      const std::size_t last = std::min(cells.size(), first + batch);
      std::vector<std::optional<CellResult>> done(last - first);
      std::vector<std::string> errors(last - first);
      for (std::size_t k = first; k < last; ++k) {
        warn_unbounded_slope(cells[k]);
      }
      // Cells of a batch run concurrently, one thread each; a lone cell
      // spreads its chains instead.
      const std::size_t chain_threads = batch > 1 ? 1 : threads;
      parallel_for(last - first, batch, [&](std::size_t i) {
        try {
          done[i] = run_cell(config, cells[first + i], first + i, seed, chain_threads, cache);
        } catch (const NumericError& e) {
          errors[i] = e.what();
        } catch (const DomainError& e) {
          errors[i] = e.what();
        }
      });
      for (std::size_t i = 0; i < done.size(); ++i) {
        const auto& cell = cells[first + i];
        if (!done[i]) {
          ++failures;
          std::fprintf(stderr, "error: cell %zu (%s) failed: %s\n", first + i + 1, cell_label(cell).c_str(),
                       errors[i].c_str());
          continue;
        }
        write_row(results, done[i]->row);
        write_timing(timing, done[i]->row);
        write_histogram_csv(hist, done[i]->row,
                            histogram_density(done[i]->chains, config.warmup, config.hist_bins,
                                              config.hist_upper));
        results.flush();
        timing.flush();
        report_progress(first + i, cells.size(), cell, done[i]->row);
      }
    }
    return static_cast<int>(failures > 0 ? kExitPartial : kExitOk);
  });
}

}  // namespace stickycir
