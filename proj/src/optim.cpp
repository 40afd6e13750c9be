#include "mnt/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mnt/rng.hpp"

namespace mnt {

Dictionary build_dictionary(const ScatteringMatrix& S, int m, std::uint64_t rng_seed,
                            EvalCounter& counter) {
  if (m < 0) throw ConfigError("build_dictionary: m must be >= 0");
  Dictionary dict;
  dict.configs.reserve(m);
  dict.channels.reserve(m);
  Rng rng(rng_seed);
  for (int k = 0; k < m; ++k) {
    RisConfig c = rng.binary_config(S.n_ris());
    dict.channels.push_back(mnt_channel(S, c, &counter));
    dict.configs.push_back(std::move(c));
  }
  return dict;
}

DictionarySearchResult dictionary_search(const Dictionary& dict) {
  if (dict.size() == 0) throw EmptyDictionary("dictionary_search: empty dictionary");
  DictionarySearchResult best;
  for (int k = 0; k < dict.size(); ++k) {
    const double cost = channel_cost(dict.channels[k]);
    if (best.index < 0 || cost < best.cost) {
      best.index = k;
      best.cost = cost;
      best.config = dict.configs[k];
    }
  }
  return best;
}

const char* fidelity_name(Fidelity f) {
  switch (f) {
    case Fidelity::Mnt: return "mnt";
    case Fidelity::Casc: return "casc";
    case Fidelity::Rr: return "rr";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Flip models

double MntFlipModel::reset(const RisConfig& c) {
  ev_.reset(c);
  has_pending_ = false;
  return ev_.current_cost();
}

double MntFlipModel::propose_flip(int j) {
  pending_ = ev_.flip_delta(j);
  has_pending_ = true;
  return channel_cost(pending_.h_new);
}

void MntFlipModel::accept() {
  if (!has_pending_) throw CacheInvalid("MntFlipModel::accept: nothing proposed");
  ev_.commit_flip(pending_);
  has_pending_ = false;
}

CascFlipModel::CascFlipModel(const ScatteringMatrix& S, EvalCounter& counter)
    : counter_(&counter) {
  if (S.partition().n_rx != 1 || S.partition().n_tx != 1)
    throw ShapeError("CascFlipModel: SISO only");
  h0_ = S.s_rt()(0, 0);
  const int ns = S.n_ris();
  terms_.resize(ns);
  for (int i = 0; i < ns; ++i) terms_[i] = S.s_rs()(0, i) * S.s_st()(i, 0);
}

double CascFlipModel::reset(const RisConfig& c) {
  if (c.size() != terms_.size()) throw DimensionMismatch("CascFlipModel::reset: bad length");
  config_ = c;
  h_cur_ = h0_ + (terms_.array() * c.cast<Complex>().array()).sum();
  pending_index_ = -1;
  counter_->add();
  return -std::norm(h_cur_);
}

double CascFlipModel::propose_flip(int j) {
  h_pending_ = h_cur_ - 2.0 * config_[j] * terms_[j];
  pending_index_ = j;
  counter_->add();
  return -std::norm(h_pending_);
}

void CascFlipModel::accept() {
  if (pending_index_ < 0) throw CacheInvalid("CascFlipModel::accept: nothing proposed");
  config_[pending_index_] = -config_[pending_index_];
  h_cur_ = h_pending_;
  pending_index_ = -1;
}

RrFlipModel::RrFlipModel(const RrSurrogate& sur, EvalCounter& counter)
    : sur_(&sur), counter_(&counter) {
  if (!sur.fitted()) throw NotFitted("RrFlipModel: surrogate not fitted");
  if (sur.n_rx() != 1 || sur.n_tx() != 1) throw ShapeError("RrFlipModel: SISO only");
}

double RrFlipModel::reset(const RisConfig& c) {
  config_ = c;
  h_cur_ = sur_->predict(c, counter_)(0, 0);
  pending_index_ = -1;
  return -std::norm(h_cur_);
}

double RrFlipModel::propose_flip(int j) {
  h_pending_ = h_cur_ - 2.0 * config_[j] * sur_->weights(0, 0)[j];
  pending_index_ = j;
  counter_->add();
  return -std::norm(h_pending_);
}

void RrFlipModel::accept() {
  if (pending_index_ < 0) throw CacheInvalid("RrFlipModel::accept: nothing proposed");
  config_[pending_index_] = -config_[pending_index_];
  h_cur_ = h_pending_;
  pending_index_ = -1;
}

// ---------------------------------------------------------------------------
// Coordinate descent

CdResult coordinate_descent(FlipCostModel& model, const RisConfig& c_init,
                            const EvalCounter& counter) {
  if (!is_binary_config(c_init))
    throw ConfigError("coordinate_descent: initial configuration must be binary");
  const int ns = static_cast<int>(c_init.size());

  CdResult out;
  out.config = c_init;
  out.cost = model.reset(c_init);
  out.trace.push_back({counter.count, out.cost});

  int stall = 0;
  int j = 0;  // 1-based cursor in the paper; 0-based here with the same cycle
  while (stall < ns) {
    const double candidate = model.propose_flip(j);
    if (candidate < out.cost) {
      model.accept();
      out.config[j] = -out.config[j];
      out.cost = candidate;
      out.trace.push_back({counter.count, out.cost});
      stall = 0;
    } else {
      ++stall;
    }
    j = (j + 1) % ns;
  }
  return out;
}

// ---------------------------------------------------------------------------
// TABP

void AdamState::init(Eigen::Index n) {
  first_moment = RealVector::Zero(n);
  second_moment = RealVector::Zero(n);
  step_count = 0;
}

void AdamState::step(RealVector& z, const RealVector& grad) {
  ++step_count;
  first_moment = beta1 * first_moment + (1.0 - beta1) * grad;
  second_moment = beta2 * second_moment + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(beta1, step_count);
  const double bc2 = 1.0 - std::pow(beta2, step_count);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double m_hat = first_moment[i] / bc1;
    const double v_hat = second_moment[i] / bc2;
    z[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon_adam);
  }
}

namespace {

RisConfig tanh_map(const RealVector& z, double t, const TabpSchedule& s) {
  return s.c_lo + 0.5 * (1.0 + (z / t).array().tanh()) * (s.c_hi - s.c_lo);
}

ValueAndGradient evaluate(const ScatteringMatrix& S, Fidelity f, const RisConfig& c,
                          EvalCounter& counter) {
  switch (f) {
    case Fidelity::Mnt: return mnt_value_and_gradient(S, c, &counter);
    case Fidelity::Casc: return casc_value_and_gradient(S, c, &counter);
    default: throw ConfigError("tabp: fidelity must be MNT or CASC");
  }
}

}  // namespace

TabpResult tabp(const ScatteringMatrix& S, Fidelity fidelity, const RisConfig& c_init,
                const TabpSchedule& sched, AdamState adam, EvalCounter& counter) {
  if (!is_binary_config(c_init)) throw ConfigError("tabp: initial configuration must be binary");
  if (!(sched.t_end > 0.0 && sched.t_end < sched.t_start))
    throw ConfigError("tabp: need 0 < t_end < t_start");
  if (sched.e_max < 1) throw ConfigError("tabp: e_max must be >= 1");

  const int ns = static_cast<int>(c_init.size());
  adam.init(ns);

  // z init through the clipped inverse map; the clip keeps atanh finite at
  // binary endpoints.
  RealVector z(ns);
  for (int i = 0; i < ns; ++i) {
    const double unit = 2.0 * (c_init[i] - sched.c_lo) / (sched.c_hi - sched.c_lo) - 1.0;
    z[i] = sched.t_start * std::atanh((1.0 - sched.init_epsilon) * unit);
  }

  TabpResult out;
  RisConfig c_relaxed = tanh_map(z, sched.t_start, sched);
  double cost_curr = evaluate(S, fidelity, c_relaxed, counter).cost;
  out.trace.push_back({counter.count, cost_curr});
  double best_cost = cost_curr;

  for (int e = 1; e <= sched.e_max - 1; ++e) {
    const double t = sched.t_start * std::pow(sched.t_end / sched.t_start,
                                              static_cast<double>(e) / sched.e_max);
    c_relaxed = tanh_map(z, t, sched);
    ValueAndGradient vg = evaluate(S, fidelity, c_relaxed, counter);
    if (vg.cost < best_cost) {
      best_cost = vg.cost;
      out.trace.push_back({counter.count, best_cost});
    }
    if (std::abs(vg.cost - cost_curr) <= sched.epsilon) {
      cost_curr = vg.cost;
      out.converged = true;
      break;
    }
    // chain rule through the temperature-scaled tanh
    RealVector grad(ns);
    const double half_range = 0.5 * (sched.c_hi - sched.c_lo);
    for (int i = 0; i < ns; ++i) {
      const double sech = 1.0 / std::cosh(z[i] / t);
      grad[i] = vg.d_cost_d_c[i] * half_range * sech * sech / t;
    }
    if (!grad.allFinite()) throw NonFiniteGradient("tabp: non-finite gradient entry");
    adam.step(z, grad);
    cost_curr = vg.cost;
  }

  // binarize: the t -> 0 limit of the tanh map; z = 0 ties resolve to c_hi
  out.config.resize(ns);
  for (int i = 0; i < ns; ++i) out.config[i] = z[i] < 0.0 ? sched.c_lo : sched.c_hi;
  out.cost = cost_curr;
  return out;
}

// ---------------------------------------------------------------------------
// Genetic algorithm

RisConfig one_point_crossover(const RisConfig& p1, const RisConfig& p2, int cut) {
  const int ns = static_cast<int>(p1.size());
  if (p2.size() != ns) throw DimensionMismatch("one_point_crossover: parent length mismatch");
  if (cut < 1 || cut > std::max(ns - 1, 1))
    throw ConfigError("one_point_crossover: cut must lie in {1..N_S-1}");
  RisConfig child(ns);
  child.head(cut) = p1.head(cut);
  if (ns > cut) child.tail(ns - cut) = p2.tail(ns - cut);
  return child;
}

GaResult genetic_algorithm(const ScatteringMatrix& S, int m, const GaParams& params,
                           std::uint64_t rng_seed, EvalCounter& counter) {
  if (m < 2 || m % 2 != 0)
    throw InvalidPopulation("genetic_algorithm: population size must be even and >= 2");
  Rng rng(rng_seed);
  std::vector<RisConfig> population;
  population.reserve(m);
  for (int k = 0; k < m; ++k) population.push_back(rng.binary_config(S.n_ris()));
  return genetic_algorithm_with_population(S, std::move(population), params,
                                           derive_seed(rng_seed, {0x6272656564ULL}), counter);
}

GaResult genetic_algorithm_with_population(const ScatteringMatrix& S,
                                           std::vector<RisConfig> population,
                                           const GaParams& params, std::uint64_t rng_seed,
                                           EvalCounter& counter) {
  const int m = static_cast<int>(population.size());
  if (m < 2 || m % 2 != 0)
    throw InvalidPopulation("genetic_algorithm: population size must be even and >= 2");
  if (params.generations < 1) throw ConfigError("genetic_algorithm: generations must be >= 1");

  const int ns = S.n_ris();
  Rng rng(rng_seed);

  GaResult out;
  out.peak_stored_configs = m;
  bool have_best = false;
  double best_fitness = 0.0;

  for (int gen = 1; gen <= params.generations; ++gen) {
    // fitness pass: M evaluations
    std::vector<double> fitness(m);
    for (int k = 0; k < m; ++k) {
      fitness[k] = channel_gain(mnt_channel(S, population[k], &counter));
      if (!have_best || fitness[k] > best_fitness) {
        have_best = true;
        best_fitness = fitness[k];
        out.config = population[k];
        out.trace.push_back({counter.count, -best_fitness});
      }
    }
    if (gen == params.generations) break;  // last population is evaluated, not bred

    // truncation selection: top half, stable under ties
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fitness[a] > fitness[b]; });
    const int pool = m / 2;

    std::vector<RisConfig> offspring;
    offspring.reserve(m);
    for (int k = 0; k < m; ++k) {
      const RisConfig& p1 = population[order[rng.below(pool)]];
      const RisConfig& p2 = population[order[rng.below(pool)]];
      // cut uniform in {1..N_S-1}; single-element configurations inherit
      // parent 1 wholesale
      const int cut =
          ns == 1 ? 1 : 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(ns - 1)));
      RisConfig child = one_point_crossover(p1, p2, cut);
      for (int g = 0; g < ns; ++g)
        if (rng.uniform() < params.mutation_prob) child[g] = -child[g];
      offspring.push_back(std::move(child));
    }
    out.peak_stored_configs = 2 * m;  // population and offspring coexist
    population = std::move(offspring);
  }
  out.cost = -best_fitness;
  return out;
}

// ---------------------------------------------------------------------------
// Initialization

const char* init_kind_name(InitKind k) {
  switch (k) {
    case InitKind::Random: return "random";
    case InitKind::DictionaryBest: return "ds";
    case InitKind::RrCdResult: return "rr-cd";
  }
  return "?";
}

InitialConfig make_initial_config(InitKind kind, const Dictionary* dict, double rr_lambda,
                                  int n_ris, std::uint64_t rng_seed, EvalCounter& counter) {
  InitialConfig out;
  if (kind != InitKind::Random && (dict == nullptr || dict->size() == 0))
    throw EmptyDictionary("make_initial_config: this initializer needs a dictionary with M >= 1");

  switch (kind) {
    case InitKind::Random: {
      Rng rng(rng_seed);
      out.config = rng.binary_config(n_ris);
      return out;
    }
    case InitKind::DictionaryBest: {
      out.config = dictionary_search(*dict).config;
      return out;
    }
    case InitKind::RrCdResult: {
      const RrSurrogate sur = fit_rr(dict->configs, dict->channels, rr_lambda);
      Rng rng(rng_seed);
      const RisConfig start = rng.binary_config(n_ris);
      EvalCounter local;
      RrFlipModel model(sur, local);
      const CdResult cd = coordinate_descent(model, start, local);
      counter.add(local.count);
      out.evaluations = local.count;
      out.config = cd.config;
      return out;
    }
  }
  throw ConfigError("make_initial_config: unknown initializer");
}

}  // namespace mnt
