#include "pesn/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "pesn/errors.hpp"
#include "pesn/moment_kernels.hpp"
#include "pesn/spline.hpp"
#include "pesn/text.hpp"

namespace pesn {

// ---------------------------------------------------------------------------
// Output plumbing

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) {
    throw ShapeError("CsvTable: row has " + std::to_string(row.size()) + " cells, header has " +
                     std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::string CsvTable::to_csv() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(columns);
  for (const auto& row : rows) line(row);
  return out;
}

std::filesystem::path write_result(const std::filesystem::path& dir, const std::string& name, const CsvTable& table,
                                   const RunInfo& info) {
  const auto path = dir / name;
  write_file(path, table.to_csv());
  nlohmann::ordered_json meta;
  meta["format"] = "pesn-result";
  meta["version"] = kVersion;
  meta["experiment"] = info.experiment;
  meta["seed"] = info.seed;
  meta["config_hash"] = info.config_hash;
  meta["columns"] = table.columns;
  meta["rows"] = table.rows.size();
  for (const auto& [key, value] : info.extra) meta["extra"][key] = value;
  write_file(sidecar_path(path), meta.dump(2) + "\n");
  return path;
}

std::string cell(double v) { return format_double(v); }

namespace {

std::string opt_cell(const std::optional<double>& v) { return v ? cell(*v) : std::string(); }

std::vector<double> default_mu_grid() {
  std::vector<double> mus;
  for (int i = -10; i <= 10; ++i) mus.push_back(0.5 * i);
  return mus;
}

InitMean parse_init_mean(const std::string& s) {
  if (s == "sampled") return InitMean::sampled;
  if (s == "zero") return InitMean::zero;
  throw ConfigError("init mean must be 'sampled' or 'zero', got '" + s + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// Moment grid

MomentsGridConfig MomentsGridConfig::from(const Config& cfg) {
  MomentsGridConfig c;
  c.activation = parse_activation(cfg.get("activation", std::string("tanh")));
  c.mus = cfg.get_list("mu", default_mu_grid());
  c.vars = cfg.get_list("var", c.vars);
  c.mc_samples = cfg.get("mc_samples", c.mc_samples);
  c.mesh_a = cfg.get("mesh_a", c.mesh_a);
  c.mesh_b = cfg.get("mesh_b", c.mesh_b);
  c.mesh_points = cfg.get("mesh_points", c.mesh_points);
  c.higher_moments = cfg.get("higher_moments", c.higher_moments);
  c.seed = cfg.get_u64("seed", c.seed);
  for (double v : c.vars) {
    if (!(v > 0.0)) throw ConfigError("moments-grid: variances must be > 0");
  }
  if (c.mc_samples < 2) throw ConfigError("moments-grid: mc_samples must be >= 2");
  return c;
}

std::vector<MomentsGridRow> run_moments_grid(const MomentsGridConfig& cfg) {
  const Activation act = Activation::make(cfg.activation);
  const int order = cfg.higher_moments ? 4 : 2;
  const SplineTable table = build_spline_table(act, cfg.mesh_a, cfg.mesh_b, cfg.mesh_points, order);
  const RngStream root(cfg.seed);
  std::vector<MomentsGridRow> rows;
  std::uint64_t point = 0;
  for (double var : cfg.vars) {
    for (double mu : cfg.mus) {
      MomentsGridRow row;
      row.mu = mu;
      row.var = var;
      row.mc = mc_moments_detailed(act, mu, var, cfg.mc_samples, root.child(point++), order);
      if (act.id == ActivationId::tanh) {
        MomentSet a;
        a.mean = analytic_tanh_mean(mu, var);
        a.variance = analytic_tanh_variance(mu, var);
        row.analytic = a;
      }
      row.spline = spline_moments(table, mu, var, order);
      row.eps_mu = mean_error_bound(table, mu, var);
      row.eps_sigma = variance_error_bound(table, mu, var);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

CsvTable moments_grid_table(const MomentsGridConfig& cfg, const std::vector<MomentsGridRow>& rows) {
  CsvTable t;
  t.columns = {"activation", "mu",           "var",          "engine",       "mean",          "variance",
               "skewness",   "kurtosis",     "mean_abs_err", "var_abs_err",  "skew_abs_err",  "kurt_abs_err",
               "eps_mu",     "eps_sigma",    "mc_mean_se",   "mc_var_se",    "low_variance"};
  const std::string act(activation_name(cfg.activation));
  for (const auto& r : rows) {
    const auto& mc = r.mc.moments;
    const bool low = mc.variance < 1e-6;
    auto emit = [&](const std::string& engine, const MomentSet& m, bool reference) {
      auto diff = [&](const std::optional<double>& a, const std::optional<double>& b) -> std::string {
        if (reference || !a || !b || low) return "";
        return cell(std::abs(*a - *b));
      };
      t.add({act,
             cell(r.mu),
             cell(r.var),
             engine,
             cell(m.mean),
             cell(m.variance),
             low ? "" : opt_cell(m.skewness),
             low ? "" : opt_cell(m.kurtosis),
             reference ? "" : cell(std::abs(m.mean - mc.mean)),
             reference ? "" : cell(std::abs(m.variance - mc.variance)),
             diff(m.skewness, mc.skewness),
             diff(m.kurtosis, mc.kurtosis),
             engine == "spline" ? opt_cell(r.eps_mu) : "",
             engine == "spline" ? opt_cell(r.eps_sigma) : "",
             cell(r.mc.mean_se),
             cell(r.mc.variance_se),
             low ? "1" : "0"});
    };
    emit("mc", mc, true);
    if (r.analytic) emit("analytic", *r.analytic, false);
    emit("spline", r.spline, false);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Timing

TimingConfig TimingConfig::from(const Config& cfg) {
  TimingConfig c;
  c.sizes = cfg.get_sizes("sizes", c.sizes);
  c.repeats = cfg.get("repeats", c.repeats);
  c.mc_samples = cfg.get("mc_samples", c.mc_samples);
  c.spline_points = cfg.get("spline_points", c.spline_points);
  c.doubled_mesh = cfg.get("doubled_mesh", c.doubled_mesh);
  c.seed = cfg.get_u64("seed", c.seed);
  if (c.repeats < 1) throw ConfigError("bench-time: repeats must be >= 1");
  return c;
}

TimingResult run_timing_bench(const TimingConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const Activation act = Activation::make(ActivationId::tanh);
  TimingResult result;

  const auto t0 = Clock::now();
  auto table = std::make_shared<const SplineTable>(build_spline_table(act, -10.0, 10.0, cfg.spline_points));
  result.table_build_s = std::chrono::duration<double>(Clock::now() - t0).count();
  const int doubled_points = 2 * (cfg.spline_points - 1) + 1;
  auto table2 = std::make_shared<const SplineTable>(build_spline_table(act, -10.0, 10.0, doubled_points));

  struct Method {
    std::string name;
    MomentEngine engine;
  };
  std::vector<Method> methods{{"analytic", MomentEngine::analytic(act)},
                              {"spline", MomentEngine::spline(table)},
                              {"mc", MomentEngine::monte_carlo(act, cfg.mc_samples, RngStream(cfg.seed, 7))}};
  if (cfg.doubled_mesh) methods.push_back({"spline_2n", MomentEngine::spline(table2)});

  for (std::size_t d : cfg.sizes) {
    NormalGenerator gen(RngStream(cfg.seed).child(d));
    Eigen::VectorXd mean(static_cast<Eigen::Index>(d)), var(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
      mean[i] = -3.0 + 6.0 * gen.uniform();
      var[i] = 0.05 + 0.95 * gen.uniform();
    }
    const DiagonalGaussian input(mean, var);
    for (const auto& m : methods) {
      double sink = propagate_moments(m.engine, input, 0).mean().sum();
      std::vector<double> times;
      for (int r = 0; r < cfg.repeats; ++r) {
        const auto start = Clock::now();
        const DiagonalGaussian out = propagate_moments(m.engine, input, static_cast<std::uint64_t>(r) + 1);
        times.push_back(std::chrono::duration<double>(Clock::now() - start).count());
        sink += out.mean()[0];
      }
      if (!std::isfinite(sink)) throw NumericError("bench-time: non-finite result");
      TimingRow row;
      row.method = m.name;
      row.size = d;
      row.median_s = median(times);
      row.min_s = *std::min_element(times.begin(), times.end());
      row.max_s = *std::max_element(times.begin(), times.end());
      result.rows.push_back(row);
    }
  }
  return result;
}

CsvTable timing_table(const TimingResult& result) {
  CsvTable t;
  t.columns = {"method", "size", "median_s", "min_s", "max_s"};
  for (const auto& r : result.rows) {
    t.add({r.method, std::to_string(r.size), cell(r.median_s), cell(r.min_s), cell(r.max_s)});
  }
  t.add({"spline_table_build", "0", cell(result.table_build_s), cell(result.table_build_s),
         cell(result.table_build_s)});
  return t;
}

// ---------------------------------------------------------------------------
// Cart pole

CartPoleSetup CartPoleSetup::from(const Config& cfg) {
  CartPoleSetup s;
  s.seed = cfg.get_u64("seed", s.seed);
  s.data.seed = cfg.get_u64("data_seed", s.seed);
  s.data.n_steps = cfg.get("n_steps", std::size_t{3000});
  s.data.excitation = parse_excitation(cfg.get("excitation", std::string("sum-of-sines")));
  s.data.amplitude = cfg.get("amplitude", s.data.amplitude);
  s.data.washout = cfg.get("train_washout", s.data.washout);
  s.data.train_fraction = cfg.get("train_fraction", s.data.train_fraction);
  const std::string integ = cfg.get("integrator", std::string("rk4"));
  if (integ != "rk4" && integ != "euler") throw ConfigError("integrator must be rk4 or euler");
  s.data.integrator = integ == "rk4" ? Integrator::rk4 : Integrator::euler;

  s.physics.cart_mass = cfg.get("cart_mass", s.physics.cart_mass);
  s.physics.pole_mass = cfg.get("pole_mass", s.physics.pole_mass);
  s.physics.half_length = cfg.get("half_length", s.physics.half_length);
  s.physics.gravity = cfg.get("gravity", s.physics.gravity);
  s.physics.dt = cfg.get("dt", s.physics.dt);
  s.physics.force_limit = cfg.get("force_limit", s.physics.force_limit);

  auto& e = s.pesn.esn;
  e.reservoir_size = cfg.get("reservoir_size", 100);
  e.leak = cfg.get("leak", 0.1);
  e.noise = cfg.get("noise", 0.0);
  e.sparsity = cfg.get("sparsity", 0.1);
  e.spectral_radius = cfg.get("spectral_radius", 0.99);
  e.rls_lambda = cfg.get("rls_lambda", e.rls_lambda);
  e.rls_delta = cfg.get("rls_delta", e.rls_delta);
  e.ridge = cfg.get("ridge", e.ridge);
  e.input_scale = cfg.get("input_scale", 0.05);
  e.feedback_scale = cfg.get("feedback_scale", 0.05);
  e.washout = s.data.washout;
  s.pesn.engine = parse_engine(cfg.get("engine", std::string("spline")));
  s.pesn.mesh_a = cfg.get("mesh_a", s.pesn.mesh_a);
  s.pesn.mesh_b = cfg.get("mesh_b", s.pesn.mesh_b);
  s.pesn.mesh_points = cfg.get("mesh_points", s.pesn.mesh_points);
  s.pesn.mc_samples = cfg.get("mc_samples", s.pesn.mc_samples);
  s.pesn.init_mean = parse_init_mean(cfg.get("train_init_mean", std::string("sampled")));
  s.pesn.init_variance = cfg.get("init_variance", s.pesn.init_variance);
  s.pesn.noise_variance_squared = cfg.get("noise_variance_squared", false);
  s.pesn.washout_mean_only = cfg.get("washout_mean_only", false);
  s.pesn.rls_in_multi = cfg.get("rls_in_multi", false);
  s.belief_init = parse_init_mean(cfg.get("belief_init_mean", std::string("zero")));
  s.physics.validate();
  s.pesn.validate();
  return s;
}

TrainedCartPole prepare_cartpole(const CartPoleSetup& setup) {
  Dataset data = make_dataset(setup.data, setup.physics);
  const RngStream root(setup.seed);
  EsnWeights weights = pesn_train(setup.pesn, {data.input_dim(), data.output_dim()}, data, root.child(0));
  MomentEngine engine = make_engine(setup.pesn, root.child(3));
  return {std::move(data), std::move(weights), std::move(engine)};
}

namespace {

PesnConfig belief_config(const CartPoleSetup& setup) {
  PesnConfig c = setup.pesn;
  c.init_mean = setup.belief_init;
  return c;
}

NextInput point_hook(double dt) {
  return [dt](std::size_t k, const Eigen::VectorXd& z, const Eigen::VectorXd& y, const Dataset& d) {
    return cartpole_next_input(k, z, y, d, dt);
  };
}

NextInputBelief belief_hook(double dt) {
  return [dt](std::size_t k, const DiagonalGaussian& z, const DiagonalGaussian& y, const Dataset& d) {
    return cartpole_next_input_belief(k, z, y, d, dt);
  };
}

std::vector<std::size_t> checked_washouts(std::vector<std::size_t> w) {
  if (w.empty()) throw ConfigError("washout list must not be empty");
  if (!std::is_sorted(w.begin(), w.end())) throw ConfigError("washout list must be sorted ascending");
  return w;
}

}  // namespace

WashoutConfig WashoutConfig::from(const Config& cfg) {
  WashoutConfig c;
  c.setup = CartPoleSetup::from(cfg);
  c.washouts = checked_washouts(cfg.get_sizes("washouts", c.washouts));
  c.trials = cfg.get("trials", c.trials);
  c.horizon = cfg.get("horizon", c.horizon);
  c.histogram.bins = cfg.get("hist_bins", c.histogram.bins);
  c.histogram.lo = cfg.get("hist_lo", c.histogram.lo);
  c.histogram.hi = cfg.get("hist_hi", c.histogram.hi);
  c.histogram.log_base = cfg.get("hist_log_base", c.histogram.log_base);
  c.histogram.validate();
  if (c.trials < 1 || c.horizon < 1) throw ConfigError("washout: trials and horizon must be >= 1");
  return c;
}

std::vector<WashoutRow> run_washout_study(const WashoutConfig& cfg) {
  const TrainedCartPole tc = prepare_cartpole(cfg.setup);
  const Dataset& data = tc.data;
  const RngStream root(cfg.setup.seed);
  const std::size_t start = data.train_end + cfg.washouts.back();
  if (start + cfg.horizon + 1 > data.rows()) {
    throw ConfigError("washout: test segment too short for the longest washout plus horizon");
  }
  const double dt = cfg.setup.physics.dt;
  const PesnConfig belief_cfg = belief_config(cfg.setup);

  std::vector<WashoutRow> rows;
  for (std::size_t wi = 0; wi < cfg.washouts.size(); ++wi) {
    const std::size_t washout = cfg.washouts[wi];
    WashoutRow row;
    row.washout = washout;

    PredictOptions po;
    po.mode = PredictMode::multi;
    po.start = start;
    po.washout = washout;
    po.horizon = cfg.horizon;
    po.rls = false;
    po.noise = cfg.setup.pesn.esn.noise > 0.0;
    po.next_input = point_hook(dt);
    po.record_washout = true;
    const EnsembleResult ens = mc_ensemble_rollout(tc.weights, data, cfg.trials, po, root.child(1).child(wi));

    auto state_error = [&](Eigen::Index s, const Eigen::VectorXd& predicted) {
      const auto truth = data.z.row(static_cast<Eigen::Index>(start) + s + 1).head(4).transpose();
      return (predicted.head(4) - truth).cwiseAbs().eval();
    };
    row.trial_error.resize(static_cast<Eigen::Index>(cfg.trials), 4);
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const auto& trial = ens.trials[t];
      Eigen::Vector4d e = Eigen::Vector4d::Zero();
      for (Eigen::Index s = 0; s < trial.next_inputs.rows(); ++s) {
        e += state_error(s, trial.next_inputs.row(s).transpose());
      }
      row.trial_error.row(static_cast<Eigen::Index>(t)) = (e / static_cast<double>(cfg.horizon)).transpose();
      row.trial_entropy.push_back(shannon_entropy(trial.washout_hidden, cfg.histogram));
    }

    PesnPredictOptions pp;
    pp.mode = PredictMode::multi;
    pp.start = start;
    pp.washout = washout;
    pp.horizon = cfg.horizon;
    pp.rls = false;
    pp.next_input = belief_hook(dt);
    pp.record_washout = true;
    const DiagonalGaussian h0 = initial_belief(belief_cfg, tc.weights.hidden(), root.child(2).child(wi));
    const PesnPredictResult pr = pesn_predict(tc.weights, belief_cfg, data, h0, pp, tc.engine);
    for (std::size_t s = 0; s < pr.next_inputs.size(); ++s) {
      row.pesn_error += state_error(static_cast<Eigen::Index>(s), pr.next_inputs[s].mean());
    }
    row.pesn_error /= static_cast<double>(cfg.horizon);
    row.pesn_entropy = shannon_entropy(pr.washout_hidden_means, cfg.histogram);
    rows.push_back(std::move(row));
  }
  return rows;
}

CsvTable washout_table(const std::vector<WashoutRow>& rows) {
  CsvTable t;
  t.columns = {"washout", "dimension", "p_mean", "p_min", "p_max", "mc_mean", "mc_min", "mc_max"};
  for (int d = 0; d < 4; ++d) {
    for (const auto& r : rows) {
      const auto col = r.trial_error.col(d);
      t.add({std::to_string(r.washout), kStateNames[d], cell(r.pesn_error[d]), cell(r.pesn_error[d]),
             cell(r.pesn_error[d]), cell(col.mean()), cell(col.minCoeff()), cell(col.maxCoeff())});
    }
  }
  return t;
}

CsvTable entropy_table(const std::vector<WashoutRow>& rows) {
  CsvTable t;
  t.columns = {"washout", "p_mean", "p_min", "p_max", "mc_mean", "mc_min", "mc_max"};
  for (const auto& r : rows) {
    double sum = 0.0;
    for (double h : r.trial_entropy) sum += h;
    const auto [lo, hi] = std::minmax_element(r.trial_entropy.begin(), r.trial_entropy.end());
    t.add({std::to_string(r.washout), cell(r.pesn_entropy), cell(r.pesn_entropy), cell(r.pesn_entropy),
           cell(sum / static_cast<double>(r.trial_entropy.size())), cell(*lo), cell(*hi)});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Model learning

ModelLearningConfig ModelLearningConfig::from(const Config& cfg) {
  ModelLearningConfig c;
  c.setup = CartPoleSetup::from(cfg);
  c.trials = cfg.get("trials", c.trials);
  c.washout = cfg.get("washout", c.washout);
  c.single_horizon = cfg.get("single_horizon", c.single_horizon);
  c.multi_horizon = cfg.get("multi_horizon", c.multi_horizon);
  c.input_variance = cfg.get("input_variance", c.input_variance);
  if (c.trials < 2) throw ConfigError("model-learning: trials must be >= 2");
  if (!(c.input_variance >= 0.0)) throw ConfigError("model-learning: input_variance must be >= 0");
  return c;
}

bool BandRecord::inside(Eigen::Index step) const {
  for (Eigen::Index d = 0; d < pesn_mean.cols(); ++d) {
    if (std::abs(pesn_mean(step, d) - mc_mean(step, d)) > 2.0 * std::sqrt(mc_var(step, d))) return false;
  }
  return true;
}

ModelLearningResult run_model_learning(const ModelLearningConfig& cfg) {
  const TrainedCartPole tc = prepare_cartpole(cfg.setup);
  const Dataset& data = tc.data;
  const RngStream root(cfg.setup.seed);
  const std::size_t start = data.train_end + cfg.washout;
  const double dt = cfg.setup.physics.dt;
  const PesnConfig belief_cfg = belief_config(cfg.setup);
  Eigen::VectorXd in_var = Eigen::VectorXd::Zero(data.input_dim());
  in_var.head(4).setConstant(cfg.input_variance);

  auto run = [&](PredictMode mode, std::size_t horizon, std::uint64_t stream) {
    PredictOptions po;
    po.mode = mode;
    po.start = start;
    po.washout = cfg.washout;
    po.horizon = horizon;
    po.rls = false;
    po.noise = cfg.setup.pesn.esn.noise > 0.0;
    po.next_input = point_hook(dt);
    po.input_noise = in_var;
    const EnsembleResult ens = mc_ensemble_rollout(tc.weights, data, cfg.trials, po, root.child(stream));

    BandRecord band;
    const auto h = static_cast<Eigen::Index>(horizon);
    const Eigen::Index ny = data.output_dim();
    band.truth = data.y.middleRows(static_cast<Eigen::Index>(start), h);
    band.mc_mean = Eigen::MatrixXd::Zero(h, ny);
    band.mc_var = Eigen::MatrixXd::Zero(h, ny);
    for (const auto& trial : ens.trials) band.mc_mean += trial.predictions;
    band.mc_mean /= static_cast<double>(cfg.trials);
    for (const auto& trial : ens.trials) band.mc_var += (trial.predictions - band.mc_mean).cwiseAbs2();
    band.mc_var /= static_cast<double>(cfg.trials - 1);

    PesnPredictOptions pp;
    pp.mode = mode;
    pp.start = start;
    pp.washout = cfg.washout;
    pp.horizon = horizon;
    pp.rls = false;
    pp.input_variance = in_var;
    pp.next_input = belief_hook(dt);
    const DiagonalGaussian h0 = initial_belief(belief_cfg, tc.weights.hidden(), root.child(stream).child(1u << 20));
    const PesnPredictResult pr = pesn_predict(tc.weights, belief_cfg, data, h0, pp, tc.engine);
    band.pesn_mean.resize(h, ny);
    band.pesn_var.resize(h, ny);
    for (Eigen::Index s = 0; s < h; ++s) {
      band.pesn_mean.row(s) = pr.outputs[static_cast<std::size_t>(s)].mean().transpose();
      band.pesn_var.row(s) = pr.outputs[static_cast<std::size_t>(s)].variance().transpose();
    }
    return band;
  };

  ModelLearningResult out;
  out.single = run(PredictMode::single, cfg.single_horizon, 4);
  out.multi = run(PredictMode::multi, cfg.multi_horizon, 5);
  return out;
}

CsvTable band_table(const BandRecord& band) {
  CsvTable t;
  t.columns = {"step", "output", "truth", "pesn_mean", "pesn_2sigma", "mc_mean", "mc_2sigma", "inside"};
  for (Eigen::Index s = 0; s < band.truth.rows(); ++s) {
    for (Eigen::Index d = 0; d < band.truth.cols(); ++d) {
      const bool in = std::abs(band.pesn_mean(s, d) - band.mc_mean(s, d)) <= 2.0 * std::sqrt(band.mc_var(s, d));
      t.add({std::to_string(s), std::to_string(d), cell(band.truth(s, d)), cell(band.pesn_mean(s, d)),
             cell(2.0 * std::sqrt(band.pesn_var(s, d))), cell(band.mc_mean(s, d)),
             cell(2.0 * std::sqrt(band.mc_var(s, d))), in ? "1" : "0"});
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// FFNN

FfnnConfig FfnnConfig::from(const Config& cfg) {
  FfnnConfig c;
  c.input_dim = cfg.get("input_dim", c.input_dim);
  c.width = cfg.get("width", c.width);
  c.depth = cfg.get("depth", c.depth);
  c.input_mean = cfg.get("input_mean", c.input_mean);
  c.input_var = cfg.get("input_var", c.input_var);
  c.mc_samples = cfg.get("mc_samples", c.mc_samples);
  c.scale_weights = cfg.get("scale_weights", c.scale_weights);
  c.mesh_a = cfg.get("mesh_a", c.mesh_a);
  c.mesh_b = cfg.get("mesh_b", c.mesh_b);
  c.mesh_points = cfg.get("mesh_points", c.mesh_points);
  c.seed = cfg.get_u64("seed", c.seed);
  if (c.input_dim < 1 || c.width < 1 || c.depth < 1) throw ConfigError("ffnn: dims must be >= 1");
  if (!(c.input_var >= 0.0)) throw ConfigError("ffnn: input_var must be >= 0");
  if (c.mc_samples < 2) throw ConfigError("ffnn: mc_samples must be >= 2");
  return c;
}

FfnnResult ffnn_propagate(const FfnnConfig& cfg) {
  const RngStream root(cfg.seed);
  // Layers 0..depth-1 are tanh, layer `depth` is the linear output.
  std::vector<Eigen::MatrixXd> weights;
  int fan_in = cfg.input_dim;
  for (int l = 0; l <= cfg.depth; ++l) {
    const int fan_out = l == cfg.depth ? 1 : cfg.width;
    NormalGenerator gen(root.child(static_cast<std::uint64_t>(l)));
    Eigen::MatrixXd w(fan_out, fan_in);
    const double scale = cfg.scale_weights ? 1.0 / std::sqrt(static_cast<double>(fan_in)) : 1.0;
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = scale * gen.normal();
    weights.push_back(std::move(w));
    fan_in = fan_out;
  }
  const auto layers = weights.size();

  // Monte Carlo forward passes, per-unit moments merged chunk by chunk.
  std::vector<Eigen::VectorXd> mc_mean(layers), mc_m2(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    mc_mean[l] = Eigen::VectorXd::Zero(weights[l].rows());
    mc_m2[l] = Eigen::VectorXd::Zero(weights[l].rows());
  }
  FfnnResult result;
  result.output_samples.reserve(cfg.mc_samples);
  const std::size_t chunk = 1000;
  const double sd = std::sqrt(cfg.input_var);
  double seen = 0.0;
  for (std::size_t begin = 0, c = 0; begin < cfg.mc_samples; begin += chunk, ++c) {
    const auto n = static_cast<Eigen::Index>(std::min(chunk, cfg.mc_samples - begin));
    NormalGenerator gen(root.child(1000).child(c));
    Eigen::MatrixXd x(cfg.input_dim, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = cfg.input_mean + sd * gen.normal();
    for (std::size_t l = 0; l < layers; ++l) {
      Eigen::MatrixXd a = weights[l] * x;
      if (l + 1 < layers) a = a.array().tanh().matrix();
      // Chan et al. merge of the chunk's mean and M2 into the running totals.
      const Eigen::VectorXd cm = a.rowwise().mean();
      const Eigen::VectorXd cm2 = (a.colwise() - cm).cwiseAbs2().rowwise().sum();
      const double nb = static_cast<double>(n);
      const double total = seen + nb;
      const Eigen::VectorXd delta = cm - mc_mean[l];
      mc_mean[l] += delta * (nb / total);
      mc_m2[l] += cm2 + delta.cwiseAbs2() * (seen * nb / total);
      x = std::move(a);
    }
    for (Eigen::Index j = 0; j < n; ++j) result.output_samples.push_back(x(0, j));
    seen += static_cast<double>(n);
  }
  std::sort(result.output_samples.begin(), result.output_samples.end());

  const Activation tanh_act = Activation::make(ActivationId::tanh);
  const MomentEngine analytic = MomentEngine::analytic(tanh_act);
  const MomentEngine spline = MomentEngine::spline(
      std::make_shared<const SplineTable>(build_spline_table(tanh_act, cfg.mesh_a, cfg.mesh_b, cfg.mesh_points)));
  auto propagate = [&](const MomentEngine& engine) {
    std::vector<DiagonalGaussian> per_layer;
    DiagonalGaussian b = DiagonalGaussian::isotropic(Eigen::VectorXd::Constant(cfg.input_dim, cfg.input_mean),
                                                     cfg.input_var);
    for (std::size_t l = 0; l < layers; ++l) {
      DiagonalGaussian a = linear_transform(b, weights[l], Eigen::VectorXd::Zero(weights[l].rows()));
      b = l + 1 < layers ? propagate_moments(engine, a) : a;
      per_layer.push_back(b);
    }
    return per_layer;
  };
  const auto an = propagate(analytic);
  const auto sp = propagate(spline);
  for (std::size_t l = 0; l < layers; ++l) {
    const Eigen::VectorXd var = mc_m2[l] / (seen - 1.0);
    FfnnLayerError e;
    e.layer = static_cast<int>(l) + 1;
    e.analytic_eps_mu = (an[l].mean() - mc_mean[l]).cwiseAbs().mean();
    e.analytic_eps_sigma = (an[l].variance() - var).cwiseAbs().mean();
    e.spline_eps_mu = (sp[l].mean() - mc_mean[l]).cwiseAbs().mean();
    e.spline_eps_sigma = (sp[l].variance() - var).cwiseAbs().mean();
    result.layers.push_back(e);
  }
  result.analytic_output = an.back()[0];
  result.spline_output = sp.back()[0];
  return result;
}

CsvTable ffnn_table(const FfnnResult& result) {
  CsvTable t;
  t.columns = {"layer", "kind", "eps_mu_spline", "eps_mu_analytic", "eps_sigma_spline", "eps_sigma_analytic"};
  for (std::size_t i = 0; i < result.layers.size(); ++i) {
    const auto& e = result.layers[i];
    t.add({std::to_string(e.layer), i + 1 == result.layers.size() ? "output" : "hidden", cell(e.spline_eps_mu),
           cell(e.analytic_eps_mu), cell(e.spline_eps_sigma), cell(e.analytic_eps_sigma)});
  }
  return t;
}

CsvTable ffnn_cdf_table(const FfnnResult& result) {
  CsvTable t;
  t.columns = {"value", "mc_cdf", "analytic_cdf", "spline_cdf"};
  const auto& s = result.output_samples;
  if (s.empty()) return t;
  auto gauss_cdf = [](const Gaussian1D& g, double x) {
    if (g.variance <= 0.0) return x >= g.mean ? 1.0 : 0.0;
    return 0.5 * std::erfc(-(x - g.mean) / std::sqrt(2.0 * g.variance));
  };
  constexpr int kPoints = 201;
  for (int q = 0; q < kPoints; ++q) {
    const auto idx = static_cast<std::size_t>(std::llround(static_cast<double>(q) / (kPoints - 1) *
                                                           static_cast<double>(s.size() - 1)));
    const double x = s[idx];
    const double mc = static_cast<double>(std::upper_bound(s.begin(), s.end(), x) - s.begin()) /
                      static_cast<double>(s.size());
    t.add({cell(x), cell(mc), cell(gauss_cdf(result.analytic_output, x)), cell(gauss_cdf(result.spline_output, x))});
  }
  return t;
}

}  // namespace pesn
