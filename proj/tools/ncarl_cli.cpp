// Command-line front end for masked-recovery experiments: ingestion of CSV,
// coordinate, and netpbm inputs, mask application, solver invocation, and
// CSV metrics/trace emission.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ncarl/ncarl.hpp"

namespace fs = std::filesystem;
using namespace ncarl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct SolveOptions {
  std::string variant = "surrogate";
  double alpha = 0.0;
  double gamma = 1.0;
  long k = 0;
  double delta = 1e-6;
  int max_iters = 50;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

struct MaskOptions {
  double rate = 0.0;
  std::vector<long> block;  // empty or {h, w}
  bool centered = false;
};

SolverConfig to_config(const SolveOptions& opt) {
  SolverConfig config;
  if (opt.variant == "surrogate")
    config.variant = Variant::SurrogateOnly;
  else if (opt.variant == "ncarl")
    config.variant = Variant::Ncarl;
  else if (opt.variant == "ncarl-noisy")
    config.variant = Variant::NcarlNoisy;
  else
    throw config_error("unknown variant: " + opt.variant);
  config.alpha = opt.alpha;
  config.gamma = opt.gamma;
  config.k = opt.k;
  config.delta = opt.delta;
  config.max_iters = opt.max_iters;
  config.rel_tol = opt.tol;
  config.seed = opt.seed;
  return config;
}

void add_solver_flags(CLI::App* cmd, SolveOptions& opt) {
  cmd->add_option("--variant", opt.variant, "surrogate, ncarl, or ncarl-noisy");
  cmd->add_option("--alpha", opt.alpha, "correlation weight");
  cmd->add_option("--gamma", opt.gamma, "data-fit tradeoff (noisy variant)");
  cmd->add_option("--k", opt.k, "similarity sparsity per row");
  cmd->add_option("--delta", opt.delta, "perturbation coefficient");
  cmd->add_option("--max-iters", opt.max_iters, "maximum iterations");
  cmd->add_option("--tol", opt.tol, "relative objective tolerance");
  cmd->add_option("--seed", opt.seed, "seed for masks and synthesis");
}

void add_mask_flags(CLI::App* cmd, MaskOptions& opt) {
  cmd->add_option("--mask-rate", opt.rate, "fraction of known entries to hide");
  cmd->add_option("--block", opt.block, "hide an h w block")->expected(2);
  cmd->add_flag("--block-centered", opt.centered, "center the block instead of seeding its corner");
}

std::string infer_format(const std::string& format, const fs::path& input) {
  if (!format.empty()) return format;
  std::string ext = input.extension().string();
  if (!ext.empty() && ext.front() == '.') ext.erase(ext.begin());
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == "csv" || ext == "coo" || ext == "pgm" || ext == "ppm") return ext;
  throw config_error("cannot infer format of " + input.string() + "; pass --format");
}

MaskedMatrix read_matrix(const fs::path& path, const std::string& format) {
  if (format == "csv") return io::read_csv(path);
  if (format == "coo") return io::read_coo(path);
  throw config_error("unsupported matrix format: " + format);
}

void write_matrix(const fs::path& path, const std::string& format, const Eigen::MatrixXd& x) {
  if (format == "csv")
    io::write_csv(path, x);
  else if (format == "coo")
    io::write_coo(path, MaskedMatrix::from_values(x, Eigen::MatrixXd::Ones(x.rows(), x.cols())));
  else
    throw config_error("unsupported matrix format: " + format);
}

struct MetricsRow {
  std::string dataset;
  std::string variant;
  double epsilon = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
  long k = 0;
  double mse = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  long rank = 0;
};

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = "dataset,variant,epsilon,alpha,gamma,k,mse,iterations,seconds,numeric_rank\n";
  char seconds_buf[32];
  for (const auto& row : rows) {
    std::snprintf(seconds_buf, sizeof(seconds_buf), "%.4f", row.seconds);
    out += row.dataset + "," + row.variant + "," + io::format_real(row.epsilon) + "," +
           io::format_real(row.alpha) + "," + io::format_real(row.gamma) + "," +
           std::to_string(row.k) + "," + io::format_real(row.mse) + "," +
           std::to_string(row.iterations) + "," + seconds_buf + "," + std::to_string(row.rank) +
           "\n";
  }
  return out;
}

std::string trace_csv(const SolveReport& report) {
  std::string out = "iter,objective,constraint_residual\n";
  for (std::size_t t = 0; t < report.objective_trace.size(); ++t)
    out += std::to_string(t + 1) + "," + io::format_real(report.objective_trace[t]) + "," +
           io::format_real(report.constraint_residual_trace[t]) + "\n";
  return out;
}

// Splits off the extra hidden entries requested on the command line and
// returns (train, eval). The eval part is empty when nothing was hidden.
struct PreparedProblem {
  MaskedMatrix train;
  std::optional<MaskedMatrix> eval;  // values to score against, on its mask
  double epsilon = 0.0;
};

PreparedProblem prepare(const MaskedMatrix& base, const MaskOptions& mask, std::uint64_t seed) {
  PreparedProblem prep{base, std::nullopt, 0.0};
  if (!mask.block.empty()) {
    MaskSpec spec{.kind = MaskKind::Block,
                  .block_height = mask.block[0],
                  .block_width = mask.block[1],
                  .placement = mask.centered ? BlockPlacement::Centered : BlockPlacement::SeededRandom,
                  .seed = seed};
    const MaskedMatrix blocked = apply_mask(Eigen::MatrixXd::Ones(base.rows(), base.cols()), spec);
    Eigen::MatrixXd train_mask = base.mask.cwiseProduct(blocked.mask);
    Eigen::MatrixXd eval_mask = base.mask - train_mask;
    prep.train = MaskedMatrix::from_values(base.values, std::move(train_mask));
    prep.eval = MaskedMatrix::from_values(base.values, std::move(eval_mask));
    prep.epsilon = static_cast<double>(mask.block[0] * mask.block[1]) /
                   static_cast<double>(base.rows() * base.cols());
  } else if (mask.rate > 0.0) {
    auto [train, holdout] = mask_known_entries(base, mask.rate, seed);
    prep.train = std::move(train);
    prep.eval = std::move(holdout);
    prep.epsilon = mask.rate;
  }
  return prep;
}

double evaluate_mse(const Eigen::MatrixXd& recovered, const std::optional<MaskedMatrix>& eval) {
  if (!eval || eval->observed_count() == 0) return 0.0;
  return mse(recovered, eval->values, eval->mask);
}

// --- complete / grid ---

struct CompleteArgs {
  std::string input;
  std::string format;
  std::string truth;
  std::string holdout;
  std::string out;
  std::string metrics;
  std::string trace;
  SolveOptions solve;
  MaskOptions mask;
};

struct CellOutcome {
  SolveReport report;
  double mse_value = 0.0;
  long rank = 0;
};

CellOutcome run_cell(const MaskedMatrix& train, const std::optional<MaskedMatrix>& eval,
                     const SolverConfig& config) {
  CellOutcome outcome;
  outcome.report = solve(train, config);
  outcome.mse_value = evaluate_mse(outcome.report.X, eval);
  outcome.rank = numeric_rank(outcome.report.X);
  return outcome;
}

PreparedProblem load_problem(const CompleteArgs& args, const std::string& format) {
  const MaskedMatrix base = read_matrix(args.input, format);
  PreparedProblem prep = prepare(base, args.mask, args.solve.seed);
  if (!args.holdout.empty()) {
    prep.eval = io::read_coo(args.holdout);
  } else if (!args.truth.empty()) {
    const MaskedMatrix truth = io::read_csv(args.truth);
    if (truth.rows() != base.rows() || truth.cols() != base.cols())
      throw config_error("truth dimensions do not match the input");
    const Eigen::MatrixXd hidden =
        Eigen::MatrixXd::Ones(base.rows(), base.cols()) - prep.train.mask;
    prep.eval = MaskedMatrix::from_values(truth.values, hidden);
  }
  return prep;
}

int cmd_complete(const CompleteArgs& args) {
  const std::string format = infer_format(args.format, args.input);
  const PreparedProblem prep = load_problem(args, format);
  const SolverConfig config = to_config(args.solve);
  const CellOutcome outcome = run_cell(prep.train, prep.eval, config);

  write_matrix(args.out, format, outcome.report.X);
  if (!args.metrics.empty()) {
    MetricsRow row{fs::path(args.input).stem().string(), variant_name(config.variant),
                   prep.epsilon, config.alpha, config.gamma, static_cast<long>(config.k),
                   outcome.mse_value, outcome.report.iterations_used,
                   outcome.report.wall_time_seconds, outcome.rank};
    io::atomic_write(args.metrics, metrics_csv({row}));
  }
  if (!args.trace.empty()) io::atomic_write(args.trace, trace_csv(outcome.report));
  return kExitOk;
}

struct GridArgs {
  CompleteArgs base;
  std::vector<double> alphas;
  std::vector<long> ks;
  std::vector<double> gammas;
};

int cmd_grid(const GridArgs& args) {
  if (args.alphas.empty() || args.ks.empty())
    throw config_error("grid needs at least one alpha and one k");
  const std::vector<double> gammas = args.gammas.empty() ? std::vector<double>{args.base.solve.gamma}
                                                         : args.gammas;
  const std::string format = infer_format(args.base.format, args.base.input);
  const PreparedProblem prep = load_problem(args.base, format);
  const std::string dataset = fs::path(args.base.input).stem().string();

  std::vector<MetricsRow> rows;
  std::optional<MetricsRow> best;
  std::size_t failures = 0;
  for (const double alpha : args.alphas)
    for (const long k : args.ks)
      for (const double gamma : gammas) {
        SolveOptions cell = args.base.solve;
        cell.alpha = alpha;
        cell.k = k;
        cell.gamma = gamma;
        const SolverConfig config = to_config(cell);
        MetricsRow row{dataset, variant_name(config.variant), prep.epsilon, alpha, gamma, k,
                       0.0,     0,                            0.0,          0};
        try {
          const CellOutcome outcome = run_cell(prep.train, prep.eval, config);
          row.mse = outcome.mse_value;
          row.iterations = outcome.report.iterations_used;
          row.seconds = outcome.report.wall_time_seconds;
          row.rank = outcome.rank;
          if (!best || row.mse < best->mse) best = row;
        } catch (const std::exception& err) {
          std::cerr << "grid cell alpha=" << alpha << " k=" << k << " gamma=" << gamma
                    << " failed: " << err.what() << "\n";
          row.mse = std::numeric_limits<double>::quiet_NaN();
          ++failures;
        }
        rows.push_back(row);
      }

  if (!args.base.metrics.empty()) io::atomic_write(args.base.metrics, metrics_csv(rows));
  if (best)
    std::cout << "best: alpha=" << best->alpha << " k=" << best->k << " gamma=" << best->gamma
              << " mse=" << io::format_real(best->mse) << "\n";
  return failures == rows.size() ? kExitNumeric : kExitOk;
}

// --- synth ---

struct SynthArgs {
  long rows = 0;
  long cols = 0;
  long rank = 1;
  double noise_frac = 0.0;
  double noise_scale = -1.0;  // negative = scale-relative default
  std::uint64_t seed = 0;
  MaskOptions mask;
  std::string out_truth;
  std::string out_masked;
  std::string out_holdout;
};

int cmd_synth(const SynthArgs& args) {
  SyntheticSpec spec{.rows = args.rows, .cols = args.cols, .rank = args.rank,
                     .noise_fraction = args.noise_frac, .seed = args.seed};
  if (args.noise_scale >= 0.0) spec.noise_scale = args.noise_scale;
  const auto [truth, noisy] = generate_synthetic(spec);

  MaskSpec mask_spec{.kind = MaskKind::Random, .rate = args.mask.rate, .seed = args.seed};
  if (!args.mask.block.empty()) {
    mask_spec.kind = MaskKind::Block;
    mask_spec.block_height = args.mask.block[0];
    mask_spec.block_width = args.mask.block[1];
    mask_spec.placement =
        args.mask.centered ? BlockPlacement::Centered : BlockPlacement::SeededRandom;
  }
  const MaskedMatrix masked = apply_mask(noisy, mask_spec);

  io::write_csv(args.out_truth, truth);
  io::write_csv(args.out_masked, masked);
  if (!args.out_holdout.empty()) {
    const Eigen::MatrixXd hidden =
        Eigen::MatrixXd::Ones(truth.rows(), truth.cols()) - masked.mask;
    io::write_coo(args.out_holdout, MaskedMatrix::from_values(truth, hidden));
  }
  return kExitOk;
}

// --- image ---

struct ImageArgs {
  std::string input;
  std::string format;
  std::string out;
  std::string metrics;
  std::string trace;
  bool gray = false;
  SolveOptions solve;
  MaskOptions mask;
};

MaskedMatrix mask_channel(const Eigen::MatrixXd& channel, const Eigen::MatrixXd& keep) {
  return MaskedMatrix::from_values(channel, keep);
}

int cmd_image(const ImageArgs& args) {
  const std::string format = infer_format(args.format, args.input);
  if (format != "pgm" && format != "ppm")
    throw config_error("image command expects pgm or ppm input");
  const SolverConfig config = to_config(args.solve);

  MaskSpec mask_spec{.kind = MaskKind::Random, .rate = args.mask.rate, .seed = args.solve.seed};
  if (!args.mask.block.empty()) {
    mask_spec.kind = MaskKind::Block;
    mask_spec.block_height = args.mask.block[0];
    mask_spec.block_width = args.mask.block[1];
    mask_spec.placement =
        args.mask.centered ? BlockPlacement::Centered : BlockPlacement::SeededRandom;
  }

  std::vector<MetricsRow> rows;
  const std::string dataset = fs::path(args.input).stem().string();
  const double epsilon = args.mask.block.empty()
                             ? args.mask.rate
                             : 0.0;  // filled in once dimensions are known

  if (format == "pgm" || args.gray) {
    Eigen::MatrixXd gray;
    int maxval = 255;
    bool binary = true;
    if (format == "pgm") {
      const io::Image img = io::read_pgm(args.input);
      gray = img.gray;
      maxval = img.maxval;
      binary = img.binary;
    } else {
      const io::ColorImage img = io::read_ppm(args.input);
      gray = io::rgb_to_gray(img);
      maxval = img.maxval;
      binary = img.binary;
    }
    const MaskedMatrix reference =
        MaskedMatrix::from_values(gray, Eigen::MatrixXd::Ones(gray.rows(), gray.cols()));
    const MaskedMatrix keep = apply_mask(gray, mask_spec);
    const PreparedProblem prep{keep,
                               MaskedMatrix::from_values(
                                   gray, Eigen::MatrixXd::Ones(gray.rows(), gray.cols()) - keep.mask),
                               epsilon};
    const CellOutcome outcome = run_cell(prep.train, prep.eval, config);
    io::write_pgm(args.out, outcome.report.X, maxval, binary);
    rows.push_back({dataset, variant_name(config.variant),
                    args.mask.block.empty()
                        ? args.mask.rate
                        : static_cast<double>(args.mask.block[0] * args.mask.block[1]) /
                              static_cast<double>(gray.rows() * gray.cols()),
                    config.alpha, config.gamma, static_cast<long>(config.k), outcome.mse_value,
                    outcome.report.iterations_used, outcome.report.wall_time_seconds,
                    outcome.rank});
    if (!args.trace.empty()) io::atomic_write(args.trace, trace_csv(outcome.report));
  } else {
    const io::ColorImage img = io::read_ppm(args.input);
    io::ColorImage recovered = img;
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(img.r.rows(), img.r.cols());
    const MaskedMatrix keep = apply_mask(ones, mask_spec);  // one mask, all channels
    const Eigen::MatrixXd hidden = ones - keep.mask;
    double total_mse = 0.0;
    int iterations = 0;
    double seconds = 0.0;
    long rank_sum = 0;
    const Eigen::MatrixXd* channels[3] = {&img.r, &img.g, &img.b};
    Eigen::MatrixXd* outputs[3] = {&recovered.r, &recovered.g, &recovered.b};
    for (int c = 0; c < 3; ++c) {
      const MaskedMatrix train = mask_channel(channels[c]->cwiseProduct(keep.mask), keep.mask);
      const std::optional<MaskedMatrix> eval =
          MaskedMatrix::from_values(*channels[c], hidden);
      const CellOutcome outcome = run_cell(train, eval, config);
      *outputs[c] = outcome.report.X;
      total_mse += outcome.mse_value;
      iterations = std::max(iterations, outcome.report.iterations_used);
      seconds += outcome.report.wall_time_seconds;
      rank_sum += outcome.rank;
    }
    io::write_ppm(args.out, recovered);
    rows.push_back({dataset, variant_name(config.variant),
                    args.mask.block.empty()
                        ? args.mask.rate
                        : static_cast<double>(args.mask.block[0] * args.mask.block[1]) /
                              static_cast<double>(img.r.rows() * img.r.cols()),
                    config.alpha, config.gamma, static_cast<long>(config.k), total_mse / 3.0,
                    iterations, seconds, rank_sum / 3});
  }

  if (!args.metrics.empty()) io::atomic_write(args.metrics, metrics_csv(rows));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix completion via a non-convex trace surrogate with adaptive "
               "column-correlation learning"};
  app.require_subcommand(1);

  CompleteArgs complete_args;
  CLI::App* complete = app.add_subcommand("complete", "recover a masked matrix");
  complete->add_option("--input", complete_args.input, "input matrix")->required();
  complete->add_option("--format", complete_args.format, "csv or coo (default: by extension)");
  complete->add_option("--truth", complete_args.truth, "dense CSV ground truth for scoring");
  complete->add_option("--holdout", complete_args.holdout, "COO holdout written by synth");
  complete->add_option("--out", complete_args.out, "recovered matrix path")->required();
  complete->add_option("--metrics", complete_args.metrics, "metrics CSV path");
  complete->add_option("--trace", complete_args.trace, "per-iteration trace CSV path");
  add_mask_flags(complete, complete_args.mask);
  add_solver_flags(complete, complete_args.solve);

  GridArgs grid_args;
  CLI::App* grid = app.add_subcommand("grid", "sweep alpha/k/gamma and report every cell");
  grid->add_option("--input", grid_args.base.input, "input matrix")->required();
  grid->add_option("--format", grid_args.base.format, "csv or coo (default: by extension)");
  grid->add_option("--truth", grid_args.base.truth, "dense CSV ground truth for scoring");
  grid->add_option("--holdout", grid_args.base.holdout, "COO holdout written by synth");
  grid->add_option("--metrics", grid_args.base.metrics, "metrics CSV path")->required();
  grid->add_option("--alphas", grid_args.alphas, "alpha values")->required()->delimiter(',');
  grid->add_option("--ks", grid_args.ks, "k values")->required()->delimiter(',');
  grid->add_option("--gammas", grid_args.gammas, "gamma values (noisy variant)")->delimiter(',');
  add_mask_flags(grid, grid_args.base.mask);
  add_solver_flags(grid, grid_args.base.solve);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic masked instance");
  synth->add_option("--rows", synth_args.rows, "rows")->required();
  synth->add_option("--cols", synth_args.cols, "columns")->required();
  synth->add_option("--rank", synth_args.rank, "target rank")->required();
  synth->add_option("--noise-frac", synth_args.noise_frac, "fraction of entries to perturb");
  synth->add_option("--noise-scale", synth_args.noise_scale,
                    "noise sigma (default 0.01 x RMS of the ground truth)");
  synth->add_option("--seed", synth_args.seed, "seed");
  synth->add_option("--out-truth", synth_args.out_truth, "ground-truth CSV")->required();
  synth->add_option("--out-masked", synth_args.out_masked, "masked-instance CSV")->required();
  synth->add_option("--out-holdout", synth_args.out_holdout, "holdout COO (truth at hidden entries)");
  add_mask_flags(synth, synth_args.mask);

  ImageArgs image_args;
  CLI::App* image = app.add_subcommand("image", "recover a masked PGM/PPM image");
  image->add_option("--input", image_args.input, "image path")->required();
  image->add_option("--format", image_args.format, "pgm or ppm (default: by extension)");
  image->add_option("--out", image_args.out, "recovered image path")->required();
  image->add_option("--metrics", image_args.metrics, "metrics CSV path");
  image->add_option("--trace", image_args.trace, "trace CSV path (grayscale only)");
  image->add_flag("--gray", image_args.gray, "convert color input to grayscale first");
  add_mask_flags(image, image_args.mask);
  add_solver_flags(image, image_args.solve);

  try {
    app.parse(argc, argv);
    if (*complete) return cmd_complete(complete_args);
    if (*grid) return cmd_grid(grid_args);
    if (*synth) return cmd_synth(synth_args);
    if (*image) return cmd_image(image_args);
    return kExitConfig;
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitConfig;
  } catch (const config_error& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const io_error& err) {
    std::cerr << "io error: " << err.what() << "\n";
    return kExitIo;
  } catch (const numeric_error& err) {
    std::cerr << "numeric error: " << err.what() << "\n";
    return kExitNumeric;
  }
}
