#include "posmg/sim.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace posmg {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  // splitmix64 finalizer
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Index of the item selected by u from a discrete distribution given as
// (weight fetch, count). Falls back to the last positive-weight index when
// float round-off leaves u past the cumulative total.
template <typename WeightAt>
int pick(double u, int count, WeightAt weight_at) {
  double cumulative = 0.0;
  int last_positive = -1;
  for (int i = 0; i < count; ++i) {
    const double w = weight_at(i);
    if (w <= 0.0) continue;
    last_positive = i;
    cumulative += w;
    if (u < cumulative) return i;
  }
  if (last_positive < 0)
    throw PosmgError(Errc::distribution, "cannot sample from zero mass");
  return last_positive;
}

const std::vector<double>& policy_mix(const PolicyTable& table,
                                      const std::string& key,
                                      const char* who) {
  const auto it = table.mix.find(key);
  if (it == table.mix.end())
    throw PosmgError(Errc::policy_coverage,
                     std::string(who) + " policy has no entry for state " + key);
  return it->second;
}

}  // namespace

double uniform_draw(std::uint64_t seed, std::uint64_t stream,
                    std::uint64_t counter) {
  const std::uint64_t h =
      mix64(mix64(seed ^ mix64(stream)) ^ mix64(counter));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

RolloutRecord rollout(const GameModel& model, const PolicyTable& p1,
                      const PolicyTable& p2, int root_x, std::uint64_t seed,
                      long long index) {
  const std::uint64_t stream = static_cast<std::uint64_t>(index);
  std::uint64_t counter = 0;
  auto draw = [&] { return uniform_draw(seed, stream, counter++); };

  RolloutRecord record;
  record.accumulated_reward = Rational(0);

  int y = pick(draw(), model.num_hidden(),
               [&](int i) { return model.initial_hidden()[i]; });
  int x = root_x;
  int remaining = model.horizon_ticks();
  Belief mu = initial_belief(model);
  long long clock = 0;
  int epoch = 0;

  while (remaining > 0) {
    const AugmentedState state{remaining, x, mu};
    const std::string key = state_key(model, state);
    const auto& w1 = policy_mix(p1, key, "player-1");
    const auto& w2 = policy_mix(p2, key, "player-2");
    const int a = pick(draw(), static_cast<int>(w1.size()),
                       [&](int i) { return w1[i]; });
    const int b = pick(draw(), static_cast<int>(w2.size()),
                       [&](int i) { return w2[i]; });

    const auto& row = model.kernel_row(x, y, a, b);
    const int which = pick(draw(), static_cast<int>(row.size()),
                           [&](int i) { return row[i].p; });
    const KernelEntry& jump = row[which];

    record.jumps.push_back({epoch, clock, x, y, a, b, jump.theta});
    const int censored = std::min(jump.theta, remaining);
    record.accumulated_reward +=
        model.reward_rate(x, y, a, b) * Rational(censored);

    if (jump.theta >= remaining) break;  // horizon reached (or crossed)
    mu = filter_update(model, remaining, x, mu, a, b, jump.theta, jump.x_next);
    remaining -= jump.theta;
    clock += jump.theta;
    x = jump.x_next;
    y = jump.y_next;
    ++epoch;
  }

  record.success = record.accumulated_reward <= model.initial_goal();
  return record;
}

RiskEstimate estimate_risk(const GameModel& model, const PolicyTable& p1,
                           const PolicyTable& p2, int root_x, long long n,
                           std::uint64_t seed, int max_threads) {
  if (n < 1)
    throw PosmgError(Errc::distribution, "rollout count must be at least 1");

  auto count_range = [&](long long begin, long long end) {
    long long successes = 0;
    for (long long i = begin; i < end; ++i)
      if (rollout(model, p1, p2, root_x, seed, i).success) ++successes;
    return successes;
  };

  long long successes = 0;
  const int threads = static_cast<int>(
      std::max<long long>(1, std::min<long long>(max_threads, n)));
  if (threads == 1) {
    successes = count_range(0, n);
  } else {
    // Success totals are integers, so the split cannot change the result.
    std::vector<long long> partial(threads, 0);
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> workers;
    const long long chunk = (n + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      const long long begin = w * chunk;
      const long long end = std::min(n, begin + chunk);
      workers.emplace_back([&, w, begin, end] {
        try {
          if (begin < end) partial[w] = count_range(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& worker : workers) worker.join();
    for (const auto& error : errors)
      if (error) std::rethrow_exception(error);
    for (long long c : partial) successes += c;
  }

  RiskEstimate estimate;
  estimate.n = n;
  estimate.seed = seed;
  estimate.mean = static_cast<double>(successes) / static_cast<double>(n);
  estimate.stderr_ =
      std::sqrt(estimate.mean * (1.0 - estimate.mean) / static_cast<double>(n));
  return estimate;
}

namespace {

struct EnumerateContext {
  const GameModel& model;
  const PolicyTable& p1;
  const PolicyTable& p2;
  long long node_cap;
  long long nodes = 0;
};

// Tree walk over hidden starts, policy supports, and kernel branches. The
// belief is carried only because the policy tables are keyed by it.
double enumerate_rec(EnumerateContext& ctx, int remaining, int x, int y,
                     const Rational& goal_left, const Belief& mu,
                     double probability) {
  if (++ctx.nodes > ctx.node_cap)
    throw PosmgError(Errc::resource,
                     "enumeration node cap " + std::to_string(ctx.node_cap) +
                         " exceeded");
  if (remaining == 0)
    return goal_left >= Rational(0) ? probability : 0.0;

  const GameModel& m = ctx.model;
  const AugmentedState state{remaining, x, mu};
  const std::string key = state_key(m, state);
  const auto& w1 = policy_mix(ctx.p1, key, "player-1");
  const auto& w2 = policy_mix(ctx.p2, key, "player-2");

  double total = 0.0;
  for (std::size_t a = 0; a < w1.size(); ++a) {
    if (w1[a] <= 0.0) continue;
    for (std::size_t b = 0; b < w2.size(); ++b) {
      if (w2[b] <= 0.0) continue;
      const double action_prob = probability * w1[a] * w2[b];
      for (const auto& jump :
           m.kernel_row(x, y, static_cast<int>(a), static_cast<int>(b))) {
        if (jump.p <= 0.0) continue;
        const double branch = action_prob * jump.p;
        const int censored = std::min(jump.theta, remaining);
        const Rational next_goal =
            goal_left - m.reward_rate(x, y, static_cast<int>(a),
                                      static_cast<int>(b)) *
                            Rational(censored);
        if (jump.theta >= remaining) {
          // Horizon exhausted before (or exactly at) the next epoch.
          total += next_goal >= Rational(0) ? branch : 0.0;
          ++ctx.nodes;
          continue;
        }
        const Belief next_mu =
            filter_update(m, remaining, x, mu, static_cast<int>(a),
                          static_cast<int>(b), jump.theta, jump.x_next);
        total += enumerate_rec(ctx, remaining - jump.theta, jump.x_next,
                               jump.y_next, next_goal, next_mu, branch);
      }
    }
  }
  return total;
}

}  // namespace

double enumerate_exact(const GameModel& model, const PolicyTable& p1,
                       const PolicyTable& p2, const AugmentedState& root,
                       long long node_cap) {
  EnumerateContext ctx{model, p1, p2, node_cap};
  double total = 0.0;
  for (int y = 0; y < model.num_hidden(); ++y) {
    const double w = model.initial_hidden()[y];
    if (w <= 0.0) continue;
    total += enumerate_rec(ctx, root.t, root.x, y, model.initial_goal(),
                           root.mu, w);
  }
  return total;
}

std::vector<Belief> filter_trace(const GameModel& model,
                                 const ObservedHistory& history) {
  std::vector<Belief> trace;
  trace.push_back(initial_belief(model));
  int x = history.x0;
  int remaining = model.horizon_ticks();
  for (const auto& step : history.steps) {
    trace.push_back(filter_update(model, remaining, x, trace.back(), step.a,
                                  step.b, step.theta, step.x_next));
    remaining = std::max(0, remaining - step.theta);
    x = step.x_next;
  }
  return trace;
}

Belief exhaustive_conditional_law(const GameModel& model,
                                  const ObservedHistory& history) {
  // Hidden trajectories consistent with the observables, each carrying its
  // exact goal after the censored accruals. Action probabilities are
  // functions of the observables, so they cancel and are omitted.
  struct Partial {
    int y;
    Rational goal;
    double weight;
  };
  std::vector<Partial> alive;
  for (int y = 0; y < model.num_hidden(); ++y) {
    const double w = model.initial_hidden()[y];
    if (w > 0.0) alive.push_back({y, model.initial_goal(), w});
  }

  int x = history.x0;
  int remaining = model.horizon_ticks();
  for (const auto& step : history.steps) {
    std::vector<Partial> next;
    const int censored = std::min(step.theta, remaining);
    for (const auto& partial : alive) {
      const Rational next_goal =
          partial.goal -
          model.reward_rate(x, partial.y, step.a, step.b) * Rational(censored);
      for (const auto& jump : model.kernel_row(x, partial.y, step.a, step.b)) {
        if (jump.theta != step.theta || jump.x_next != step.x_next) continue;
        if (jump.p <= 0.0) continue;
        next.push_back({jump.y_next, next_goal, partial.weight * jump.p});
      }
    }
    if (next.empty())
      throw PosmgError(Errc::impossible_observation,
                       "impossible-observation: history has zero probability");
    alive = std::move(next);
    remaining = std::max(0, remaining - step.theta);
    x = step.x_next;
  }

  std::vector<BeliefAtom> atoms;
  atoms.reserve(alive.size());
  for (const auto& partial : alive)
    atoms.push_back({partial.y, partial.goal, partial.weight});
  return Belief::from_atoms(std::move(atoms));
}

}  // namespace posmg
