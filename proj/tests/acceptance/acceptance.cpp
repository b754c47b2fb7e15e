// Acceptance checks: one PASS/FAIL line per criterion.  Tolerances and
// runtime budgets are fixed here and must not be relaxed to make a run pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "properties.hpp"
#include "vpmac/config.hpp"
#include "vpmac/mac.hpp"
#include "vpmac/sim.hpp"

using namespace vpmac;
using namespace vpmac::testing;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // 0 means no runtime bound
    std::function<Outcome()> body;
};

class Detail {
public:
    template <typename T>
    Detail& operator<<(const T& v) {
        os_ << v;
        return *this;
    }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

// Records a condition; keeps the first failure message.
void expect(Outcome& o, bool cond, const std::string& what) {
    if (!cond && o.pass) o.detail = what;
    o.pass = o.pass && cond;
}

RunConfig preset_run(const char* name) { return std::get<RunConfig>(preset(name)); }

Outcome x_star_values() {
    Outcome o;
    const double col = compute_x_star(collision_params(), sum_throughput()).x_star;
    const double fad = compute_x_star(fading_params(), energy_weighted(0.3)).x_star;
    expect(o, std::abs(col - 1.0) <= 1e-6, (Detail() << "collision x*=" << col).str());
    expect(o, std::abs(fad - 3.29) <= 0.02, (Detail() << "fading x*=" << fad).str());
    if (o.pass) o.detail = (Detail() << "x*=" << col << " and " << fad).str();
    return o;
}

Outcome design_constants() {
    Outcome o;
    const MacDesign c = collision_design();
    const MacDesign f = fading_design();
    expect(o, c.j_ev == 0 && std::abs(c.gamma_ev) <= 1e-9 && std::abs(c.b - 1.01) <= 1e-9,
           (Detail() << "collision (J, gamma, b)=(" << c.j_ev << ", " << c.gamma_ev << ", " << c.b << ")").str());
    expect(o, f.j_ev == 3 && std::abs(f.gamma_ev - 3.0) <= 1e-9 && std::abs(f.b - 1.01) <= 1e-9,
           (Detail() << "fading (J, gamma, b)=(" << f.j_ev << ", " << f.gamma_ev << ", " << f.b << ")").str());
    if (o.pass) o.detail = "(0, 0, 1.01) and (3, 3, 1.01)";
    return o;
}

Outcome fixed_point() {
    Outcome o;
    double worst = 0.0;
    for (const MacDesign& d : {collision_design(), fading_design()}) {
        for (std::size_t k = d.j_ev + 1; k <= 50; ++k) {
            const double p = std::min(d.p_max, d.x_star / (static_cast<double>(k) + d.b));
            const double gap = std::abs(q_v_star(p, d) - q_v_identical(p, k, d.params));
            worst = std::max(worst, gap);
            expect(o, gap < 1e-9, (Detail() << "K=" << k << " gap " << gap).str());
        }
    }
    if (o.pass) o.detail = (Detail() << "max |q_v_star - q_v_identical| = " << worst).str();
    return o;
}

Outcome monotonicity_suites() {
    Outcome o;
    std::size_t evaluations = 0;
    Rng rng(4242);
    std::vector<ChannelParams> profiles{collision_params(), fading_params()};
    for (int i = 0; i < 50; ++i) {
        const Profile v = random_non_increasing(rng, true);
        profiles.emplace_back(v, v);
    }
    for (const auto& params : profiles) {
        const Check c = check_qv_identical_monotone(params);
        evaluations += c.evaluations;
        expect(o, c.ok, c.detail);
    }
    std::vector<MacDesign> designs = random_designs(4243, 50);
    designs.push_back(collision_design());
    designs.push_back(fading_design());
    for (const MacDesign& d : designs) {
        for (const Check& c :
             {check_qv_star_monotone(d), check_fixed_point(d), check_decomposition(d), check_conditional_order(d)}) {
            evaluations += c.evaluations;
            expect(o, c.ok, c.detail);
        }
    }
    if (o.pass)
        o.detail = (Detail() << profiles.size() << " profiles, " << designs.size() << " designs, " << evaluations
                             << " evaluations")
                       .str();
    return o;
}

Outcome table_ordering() {
    Outcome o;
    const ChannelParams col = collision_params();
    const MacDesign cd = collision_design();
    for (std::size_t k = 2; k <= 30; ++k) {
        const double u_star = utility_finite(k, cd.equilibrium_p(k), col, cd.utility);
        const double u_a = utility_finite(k, hajek_pa(k), col, cd.utility);
        const double u_opt = utility_finite(k, optimal_p(k, col, cd.utility), col, cd.utility);
        expect(o, u_star >= u_a - 1e-9, (Detail() << "collision K=" << k << ": U* " << u_star << " < U_a " << u_a).str());
        expect(o, u_opt >= u_star, (Detail() << "collision K=" << k << ": U_opt " << u_opt << " < U* " << u_star).str());
    }
    const ChannelParams fad = fading_params();
    const MacDesign fd = fading_design();
    for (std::size_t k = 4; k <= 30; ++k) {
        const double u_star = utility_finite(k, fd.equilibrium_p(k), fad, fd.utility);
        const double u_idle = utility_finite(k, idle_target_p(k, fd.x_star), fad, fd.utility);
        expect(o, u_star >= u_idle - 1e-9,
               (Detail() << "fading K=" << k << ": U* " << u_star << " < U_idle " << u_idle).str());
    }
    if (o.pass) o.detail = "collision K=2..30 and fading K=4..30";
    return o;
}

Outcome example3() {
    Outcome o;
    const RunConfig cfg = preset_run("ex3");
    const AggregateTrace agg = run_many(cfg.scenario, 10);
    expect(o, agg.runs.size() == 10, "expected 10 runs");
    std::vector<double> ratios;
    double lo = 1.0, hi = 0.0, lo1000 = 1.0, hi1000 = 0.0;
    for (const SimTrace& t : agg.runs) {
        const double p = t.summary.final_mean_p;
        lo = std::min(lo, p);
        hi = std::max(hi, p);
        expect(o, std::abs(p - 0.365) <= 0.05, (Detail() << "seed " << t.scenario.seed << " final p " << p).str());
        const double p1000 = t.records.at(999).mean_p;
        lo1000 = std::min(lo1000, p1000);
        hi1000 = std::max(hi1000, p1000);
        expect(o, std::abs(p1000 - 0.365) <= 0.1, (Detail() << "seed " << t.scenario.seed << " p@1000 " << p1000).str());
        ratios.push_back(t.summary.final_utility_ema / t.summary.u_opt);
    }
    std::sort(ratios.begin(), ratios.end());
    const double median = 0.5 * (ratios[4] + ratios[5]);
    expect(o, median >= 0.85, (Detail() << "median utility ratio " << median).str());
    if (o.pass)
        o.detail = (Detail() << "final p in [" << lo << ", " << hi << "], p@1000 in [" << lo1000 << ", " << hi1000
                             << "], median U/U_opt " << median)
                       .str();
    return o;
}

Outcome example4() {
    Outcome o;
    const AggregateTrace agg = run_many(preset_run("ex4").scenario, 10);
    double lo = 1.0, hi = 0.0;
    for (const SimTrace& t : agg.runs) {
        const double p = t.summary.final_mean_p;
        lo = std::min(lo, p);
        hi = std::max(hi, p);
        expect(o, std::abs(p - 0.365) <= 0.05, (Detail() << "seed " << t.scenario.seed << " final p " << p).str());
    }
    if (o.pass) o.detail = (Detail() << "final p in [" << lo << ", " << hi << "]").str();
    return o;
}

Outcome example5() {
    Outcome o;
    const RunConfig cfg = preset_run("ex5");
    expect(o, cfg.scenario.summary_window == 1000, "ex5 summary window must be 1000 slots");
    const AggregateTrace agg = run_many(cfg.scenario, 10);
    const std::size_t expected_users[] = {8, 15, 10};
    double worst = 0.0;
    for (const SimTrace& t : agg.runs) {
        expect(o, t.summary.stages.size() == 3, "expected three stages");
        for (std::size_t s = 0; s < t.summary.stages.size() && s < 3; ++s) {
            const StageSummary& st = t.summary.stages[s];
            expect(o, st.users == expected_users[s], (Detail() << "stage " << s << " has " << st.users << " users").str());
            const double target = 3.29 / (static_cast<double>(st.users) + 1.01);
            const double err = std::abs(st.tail_mean_p - target);
            worst = std::max(worst, err);
            expect(o, err <= 0.07,
                   (Detail() << "seed " << t.scenario.seed << " stage K=" << st.users << " mean p " << st.tail_mean_p
                             << " vs " << target)
                       .str());
        }
    }
    if (o.pass) o.detail = (Detail() << "max stage error " << worst).str();
    return o;
}

Outcome monte_carlo_agreement() {
    Outcome o;
    struct Case {
        double p;
        std::size_t users;
        bool fading;
    };
    const Case cases[] = {{0.05, 5, false}, {0.1, 8, false},  {0.3, 5, false},  {0.2, 3, false},  {0.5, 2, false},
                          {0.02, 30, false}, {0.15, 10, false}, {0.7, 1, false},  {0.4, 4, false},  {0.1, 20, false},
                          {0.365, 8, true},  {0.2, 15, true},   {0.3, 10, true},  {0.5, 8, true},   {0.7, 6, true},
                          {0.1, 30, true},   {0.9, 4, true},    {0.25, 20, true}, {0.45, 12, true}, {0.6, 9, true}};
    constexpr std::uint64_t n = 100000;
    double worst_z = 0.0;
    std::uint64_t seed = 9000;
    for (const Case& c : cases) {
        const ChannelModel model = c.fading ? fading_channel() : ChannelModel{CollisionChannel{}};
        const double q = q_v_identical(c.p, c.users, derive_params(model));
        const double m = measure_stationary_qv(c.p, c.users, model, n, seed++);
        const double se = std::sqrt(q * (1.0 - q) / static_cast<double>(n));
        const double z = se > 0 ? std::abs(m - q) / se : (m == q ? 0.0 : INFINITY);
        worst_z = std::max(worst_z, z);
        expect(o, z <= 4.0,
               (Detail() << (c.fading ? "fading" : "collision") << " p=" << c.p << " K=" << c.users << ": " << m
                         << " vs " << q)
                   .str());
    }
    if (o.pass) o.detail = (Detail() << "20 cases, max |z| = " << worst_z).str();
    return o;
}

Outcome noiseless_iteration() {
    Outcome o;
    const MacDesign d = collision_design();
    ControllerState s{0.0, ConstantStep{0.05}, 0};
    int it = 0;
    for (; it < 5000 && std::abs(s.p - 1.0 / 9.01) > 1e-6; ++it)
        s = apply_update(s, target_receiver(q_v_identical(s.p, 8, d.params), d));
    const double err = std::abs(s.p - 1.0 / 9.01);
    expect(o, err <= 1e-6, (Detail() << "error " << err << " after " << it << " iterations").str());
    if (o.pass) o.detail = (Detail() << "within 1e-6 after " << it << " iterations").str();
    return o;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "x* for both example channels", 1.0, x_star_values},
        {2, "design constants (J, gamma, b)", 0.0, design_constants},
        {3, "equilibrium is a fixed point of the contention map", 1.0, fixed_point},
        {4, "monotonicity and decomposition suites", 30.0, monotonicity_suites},
        {5, "utility ordering against baselines", 0.0, table_ordering},
        {6, "example 3 reproduction (receiver feedback)", 60.0, example3},
        {7, "example 4 reproduction (one-step)", 0.0, example4},
        {8, "example 5 equilibrium tracking", 0.0, example5},
        {9, "Monte-Carlo vs analytic contention", 0.0, monte_carlo_agreement},
        {10, "noiseless iteration converges", 0.0, noiseless_iteration},
    };
    int passed = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_seconds > 0 && secs >= c.budget_seconds) {
            o.pass = false;
            o.detail += (Detail() << " [over the " << c.budget_seconds << " s budget]").str();
        }
        passed += o.pass ? 1 : 0;
        std::printf("CRITERION %2d %s: %s (%.2f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs,
                    o.detail.c_str());
    }
    std::printf("ACCEPTANCE %d/%zu passed\n", passed, criteria.size());
    return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
