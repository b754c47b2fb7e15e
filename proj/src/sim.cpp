#include "vpmac/sim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace vpmac {
namespace {

struct User {
    ControllerState ctl;
    double q_k = 1.0;
    std::uint32_t window_attempts = 0;
    std::uint32_t window_successes = 0;
    // One-step targets depend only on q_k, which is often unchanged between slots.
    double cached_q_k = -1.0;
    double cached_target = 0.0;
};

User fresh_user(double p, double q_k, const StepSchedule& schedule) {
    User u;
    u.ctl = ControllerState{p, schedule, 0};
    u.q_k = q_k;
    return u;
}

void fill_stage_references(StageSummary& st, const MacDesign& d) {
    st.p_star = d.equilibrium_p(st.users);
    st.p_opt = optimal_p(st.users, d.params, d.utility);
    st.u_star = utility_finite(st.users, st.p_star, d.params, d.utility);
    st.u_opt = utility_finite(st.users, st.p_opt, d.params, d.utility);
}

double tail_mean(const std::vector<double>& series, std::uint64_t first, std::uint64_t last, std::uint64_t window) {
    // first/last are 1-based slot numbers, inclusive
    if (last < first) return 0.0;
    const std::uint64_t len = std::min<std::uint64_t>(window, last - first + 1);
    double acc = 0.0;
    for (std::uint64_t s = last - len + 1; s <= last; ++s) acc += series[s - 1];
    return len == 0 ? 0.0 : acc / static_cast<double>(len);
}

ScalarStats scalar_stats(const std::vector<double>& xs) {
    ScalarStats st;
    if (xs.empty()) return st;
    const double n = static_cast<double>(xs.size());
    st.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - st.mean) * (x - st.mean);
    st.stddev = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    st.min = *lo;
    st.max = *hi;
    return st;
}

template <typename Field>
SeriesStats series_stats(const std::vector<SimTrace>& runs, Field field) {
    SeriesStats out;
    if (runs.empty()) return out;
    const std::size_t len = runs.front().records.size();
    out.mean.resize(len);
    out.stddev.resize(len);
    std::vector<double> column(runs.size());
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t r = 0; r < runs.size(); ++r) column[r] = field(runs[r].records[i]);
        const ScalarStats st = scalar_stats(column);
        out.mean[i] = st.mean;
        out.stddev[i] = st.stddev;
    }
    return out;
}

}  // namespace

void validate(const Scenario& sc) {
    validate(sc.channel);
    validate(sc.schedule);
    if (sc.initial_users < 1) throw std::invalid_argument("initial_users must be at least 1");
    if (!(sc.initial_p >= 0.0 && sc.initial_p <= 1.0)) throw std::invalid_argument("initial_p must lie in [0, 1]");
    if (!(sc.design.b_margin > 0.0) && !(sc.design.x_star && sc.design.b))
        throw std::invalid_argument("design.b_margin must be > 0 (b must strictly exceed max{1, x* - gamma_ev})");
    if (sc.design.x_star.has_value() != sc.design.b.has_value())
        throw std::invalid_argument("design.x_star and design.b must be given together");
    if (!(sc.design.epsilon_v >= 0.0)) throw std::invalid_argument("design.epsilon_v must be non-negative");
    if (!(sc.design.utility.energy_cost >= 0.0)) throw std::invalid_argument("utility energy_cost must be >= 0");
    if (!(sc.estimator.initial_value >= 0.0 && sc.estimator.initial_value <= 1.0))
        throw std::invalid_argument("estimator initial_value must lie in [0, 1]");
    if (const auto* w = std::get_if<WindowEstimator>(&sc.estimator.kind)) {
        if (w->slots < 1) throw std::invalid_argument("window estimator needs Q >= 1");
    } else {
        const double wt = std::get<EmaEstimator>(sc.estimator.kind).weight;
        if (!(wt > 0.0 && wt < 1.0)) throw std::invalid_argument("EMA weight must lie in (0, 1)");
    }
    if (!(sc.utility_ema_weight > 0.0 && sc.utility_ema_weight < 1.0))
        throw std::invalid_argument("utility EMA weight must lie in (0, 1)");
    if (sc.stride < 1) throw std::invalid_argument("stride must be at least 1");
    if (sc.summary_window < 1) throw std::invalid_argument("summary_window must be at least 1");

    std::size_t users = sc.initial_users;
    std::uint64_t prev = 0;
    for (const auto& ev : sc.events) {
        if (ev.slot <= prev)
            throw std::invalid_argument("event slots must be strictly increasing and start at 1 (slot " +
                                        std::to_string(ev.slot) + ")");
        if (ev.slot > sc.horizon)
            throw std::invalid_argument("event at slot " + std::to_string(ev.slot) + " lies beyond horizon " +
                                        std::to_string(sc.horizon));
        if (ev.count == 0) throw std::invalid_argument("event at slot " + std::to_string(ev.slot) + " changes no users");
        if (ev.change == PopulationChange::Join) {
            users += ev.count;
        } else {
            if (ev.count >= users)
                throw std::invalid_argument("event at slot " + std::to_string(ev.slot) +
                                            " would leave fewer than one user");
            users -= ev.count;
        }
        prev = ev.slot;
    }
}

MacDesign resolve_design(const Scenario& sc) {
    const ChannelParams params = derive_params(sc.channel);
    const DesignInputs& in = sc.design;
    if (in.x_star && in.b) return make_design(params, in.utility, in.epsilon_v, *in.x_star, *in.b);
    return build_design(params, in.utility, in.epsilon_v, in.b_margin);
}

SimTrace run(const Scenario& sc) {
    validate(sc);
    SimTrace trace;
    trace.scenario = sc;
    trace.design = resolve_design(sc);
    const MacDesign& design = trace.design;
    const double energy = design.utility.effective_energy();

    Rng rng(sc.seed);
    std::vector<User> users;
    users.reserve(sc.initial_users);
    for (std::size_t i = 0; i < sc.initial_users; ++i)
        users.push_back(fresh_user(sc.initial_p, sc.estimator.initial_value, sc.schedule));

    const auto* ema = std::get_if<EmaEstimator>(&sc.estimator.kind);
    const std::uint32_t window = ema ? 1 : std::get<WindowEstimator>(sc.estimator.kind).slots;

    double q_v = sc.estimator.initial_value;
    std::uint32_t window_fill = 0;
    std::uint32_t window_virtual = 0;
    double utility_ema = 0.0;

    std::vector<double> mean_p_series(sc.horizon);
    std::vector<double> utility_series(sc.horizon);
    trace.records.reserve(static_cast<std::size_t>((sc.horizon + sc.stride - 1) / sc.stride));

    std::vector<StageSummary> stages;
    stages.push_back(StageSummary{1, sc.horizon, users.size()});
    std::size_t next_event = 0;

    std::vector<bool> flags;
    std::vector<double> targets;
    for (std::uint64_t slot = 1; slot <= sc.horizon; ++slot) {
        // Population changes consume randomness before the channel draw.
        while (next_event < sc.events.size() && sc.events[next_event].slot == slot) {
            const PopulationEvent& ev = sc.events[next_event++];
            if (ev.change == PopulationChange::Join) {
                for (std::size_t i = 0; i < ev.count; ++i) users.push_back(fresh_user(0.0, 1.0, sc.schedule));
            } else {
                for (std::size_t i = 0; i < ev.count; ++i)
                    users.erase(users.begin() + static_cast<std::ptrdiff_t>(rng.below(users.size())));
            }
            stages.back().last_slot = slot - 1;
            stages.push_back(StageSummary{slot, sc.horizon, users.size()});
        }

        const auto state = draw_state(sc.channel, rng);
        flags.resize(users.size());
        for (std::size_t k = 0; k < users.size(); ++k) flags[k] = rng.bernoulli(users[k].ctl.p);
        const SlotOutcome out = resolve_slot(sc.channel, state, flags, rng);

        // Receiver-side contention estimate.
        if (ema) {
            q_v = (1.0 - ema->weight) * q_v + ema->weight * (out.virtual_success ? 1.0 : 0.0);
        } else {
            window_virtual += out.virtual_success ? 1 : 0;
        }

        // Own-packet estimates change only on slots where the user transmitted.
        std::size_t tx_index = 0;
        for (std::size_t k = 0; k < users.size(); ++k) {
            if (!flags[k]) continue;
            const bool ok = out.real_success[tx_index++];
            if (ema) {
                users[k].q_k = (1.0 - ema->weight) * users[k].q_k + ema->weight * (ok ? 1.0 : 0.0);
            } else {
                ++users[k].window_attempts;
                users[k].window_successes += ok ? 1 : 0;
            }
        }

        bool feedback = true;
        if (!ema) {
            feedback = ++window_fill == window;
            if (feedback) {
                q_v = static_cast<double>(window_virtual) / static_cast<double>(window);
                for (auto& u : users) {
                    if (u.window_attempts > 0)
                        u.q_k = static_cast<double>(u.window_successes) / static_cast<double>(u.window_attempts);
                    u.window_attempts = 0;
                    u.window_successes = 0;
                }
                window_fill = 0;
                window_virtual = 0;
            }
        }

        if (feedback) {
            // Targets are computed from the pre-update state of every user, then applied together.
            targets.resize(users.size());
            if (sc.mode == FeedbackMode::ReceiverContention) {
                std::fill(targets.begin(), targets.end(), target_receiver(q_v, design));
            } else {
                for (std::size_t k = 0; k < users.size(); ++k) {
                    User& u = users[k];
                    if (sc.mode == FeedbackMode::TwoStep) {
                        targets[k] = target_two_step(u.ctl.p, u.q_k, design);
                    } else {
                        if (u.q_k != u.cached_q_k) {
                            u.cached_q_k = u.q_k;
                            u.cached_target = target_one_step(u.q_k, design);
                        }
                        targets[k] = u.cached_target;
                    }
                }
            }
            for (std::size_t k = 0; k < users.size(); ++k) users[k].ctl = apply_update(users[k].ctl, targets[k]);
        }

        const std::size_t n_success = out.n_success();
        const double sample = static_cast<double>(n_success) - energy * static_cast<double>(out.n_transmitted);
        utility_ema = (1.0 - sc.utility_ema_weight) * utility_ema + sc.utility_ema_weight * sample;

        double sum_p = 0.0;
        double min_p = 1.0;
        double max_p = 0.0;
        double sum_q = 0.0;
        for (const auto& u : users) {
            sum_p += u.ctl.p;
            min_p = std::min(min_p, u.ctl.p);
            max_p = std::max(max_p, u.ctl.p);
            sum_q += u.q_k;
        }
        const double n_active = static_cast<double>(users.size());
        mean_p_series[slot - 1] = sum_p / n_active;
        utility_series[slot - 1] = utility_ema;

        if ((slot - 1) % sc.stride == 0) {
            trace.records.push_back(SlotRecord{slot, users.size(), sum_p / n_active, min_p, max_p, q_v,
                                               sum_q / n_active, out.virtual_success, out.n_transmitted, n_success,
                                               sample, utility_ema});
        }
    }

    TraceSummary& sum = trace.summary;
    for (auto& st : stages) {
        fill_stage_references(st, design);
        st.tail_mean_p = tail_mean(mean_p_series, st.first_slot, st.last_slot, sc.summary_window);
        st.final_utility_ema = st.last_slot >= st.first_slot ? utility_series[st.last_slot - 1] : 0.0;
    }
    const StageSummary& last = stages.back();
    sum.final_users = last.users;
    sum.p_star = last.p_star;
    sum.p_opt = last.p_opt;
    sum.u_star = last.u_star;
    sum.u_opt = last.u_opt;
    sum.final_mean_p = tail_mean(mean_p_series, 1, sc.horizon, sc.summary_window);
    sum.final_utility_ema = utility_ema;
    sum.utility_ratio = sum.u_opt != 0.0 ? utility_ema / sum.u_opt : 0.0;
    sum.equilibrium_ratio = sum.u_opt != 0.0 ? sum.u_star / sum.u_opt : 0.0;
    if (sc.horizon == 0) stages.back().last_slot = 0;
    sum.stages = std::move(stages);
    return trace;
}

AggregateTrace run_many(const Scenario& scenario, std::size_t n_seeds) {
    if (n_seeds < 1) throw std::invalid_argument("run_many needs at least one seed");
    validate(scenario);

    AggregateTrace agg;
    agg.n_seeds = n_seeds;
    agg.runs.resize(n_seeds);

    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n_seeds, std::thread::hardware_concurrency()));
    std::vector<std::future<void>> pending;
    for (std::size_t w = 0; w < workers; ++w) {
        pending.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < n_seeds; i += workers) {
                Scenario sc = scenario;
                sc.seed = scenario.seed + i;
                agg.runs[i] = run(sc);
            }
        }));
    }
    for (auto& f : pending) f.get();

    for (const auto& rec : agg.runs.front().records) agg.slots.push_back(rec.slot);
    agg.mean_p = series_stats(agg.runs, [](const SlotRecord& r) { return r.mean_p; });
    agg.utility_ema = series_stats(agg.runs, [](const SlotRecord& r) { return r.utility_ema; });
    agg.q_v = series_stats(agg.runs, [](const SlotRecord& r) { return r.q_v; });

    std::vector<double> fp, fu, ur;
    for (const auto& r : agg.runs) {
        fp.push_back(r.summary.final_mean_p);
        fu.push_back(r.summary.final_utility_ema);
        ur.push_back(r.summary.utility_ratio);
    }
    agg.final_mean_p = scalar_stats(fp);
    agg.final_utility_ema = scalar_stats(fu);
    agg.utility_ratio = scalar_stats(ur);
    return agg;
}

double measure_stationary_qv(double p, std::size_t users, const ChannelModel& channel, std::uint64_t n_slots,
                             std::uint64_t seed) {
    if (n_slots < 1) throw std::invalid_argument("measure_stationary_qv needs n_slots >= 1");
    validate(channel);
    Rng rng(seed);
    std::vector<bool> flags(users);
    std::uint64_t hits = 0;
    for (std::uint64_t s = 0; s < n_slots; ++s) {
        const auto state = draw_state(channel, rng);
        for (std::size_t k = 0; k < users; ++k) flags[k] = rng.bernoulli(p);
        hits += resolve_slot(channel, state, flags, rng).virtual_success ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(n_slots);
}

}  // namespace vpmac
