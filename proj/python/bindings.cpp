#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vpmac/config.hpp"
#include "vpmac/report.hpp"

namespace py = pybind11;
using namespace vpmac;

namespace {

py::dict trace_dict(const SimTrace& trace) {
    const std::size_t n = trace.records.size();
    std::vector<double> slot(n), mean_p(n), q_v(n), mean_q_k(n), utility_ema(n);
    std::vector<std::size_t> n_active(n), n_transmitted(n);
    for (std::size_t i = 0; i < n; ++i) {
        const SlotRecord& r = trace.records[i];
        slot[i] = static_cast<double>(r.slot);
        mean_p[i] = r.mean_p;
        q_v[i] = r.q_v;
        mean_q_k[i] = r.mean_q_k;
        utility_ema[i] = r.utility_ema;
        n_active[i] = r.n_active;
        n_transmitted[i] = r.n_transmitted;
    }
    const TraceSummary& s = trace.summary;
    py::dict summary;
    summary["final_mean_p"] = s.final_mean_p;
    summary["final_utility_ema"] = s.final_utility_ema;
    summary["p_star"] = s.p_star;
    summary["p_opt"] = s.p_opt;
    summary["U_star"] = s.u_star;
    summary["U_opt"] = s.u_opt;
    summary["utility_ratio"] = s.utility_ratio;
    py::list stages;
    for (const auto& st : s.stages) {
        py::dict d;
        d["first_slot"] = st.first_slot;
        d["last_slot"] = st.last_slot;
        d["users"] = st.users;
        d["p_star"] = st.p_star;
        d["tail_mean_p"] = st.tail_mean_p;
        stages.append(d);
    }
    summary["stages"] = stages;

    py::dict out;
    out["slot"] = slot;
    out["n_active"] = n_active;
    out["mean_p"] = mean_p;
    out["q_v"] = q_v;
    out["mean_q_k"] = mean_q_k;
    out["n_transmitted"] = n_transmitted;
    out["utility_ema"] = utility_ema;
    out["summary"] = summary;
    return out;
}

RunConfig run_job(const Job& job) {
    const auto* cfg = std::get_if<RunConfig>(&job);
    if (cfg == nullptr) throw std::invalid_argument("expected a simulation job, got a table job");
    return *cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Virtual-packet contention MAC: channel models, design constants, targets and simulation";

    py::class_<ChannelParams>(m, "ChannelParams")
        .def(py::init([](std::vector<double> c_real, std::vector<double> c_virtual, double real_tail,
                         double virtual_tail) {
                 return ChannelParams(Profile(std::move(c_real), real_tail), Profile(std::move(c_virtual), virtual_tail));
             }),
             py::arg("c_real"), py::arg("c_virtual"), py::arg("real_tail") = 0.0, py::arg("virtual_tail") = 0.0)
        .def("c_real", [](const ChannelParams& p, std::size_t j) { return p.real[j]; })
        .def("c_virtual", [](const ChannelParams& p, std::size_t j) { return p.virt[j]; });

    py::class_<CollisionChannel>(m, "CollisionChannel").def(py::init<>());
    py::class_<ThresholdFadingChannel>(m, "ThresholdFadingChannel")
        .def(py::init([](const std::vector<std::pair<double, std::uint32_t>>& states) {
                 ThresholdFadingChannel ch;
                 for (const auto& [prob, cap] : states) ch.states.push_back({prob, cap});
                 return ch;
             }),
             py::arg("states"));
    py::class_<ParametricChannel>(m, "ParametricChannel").def(py::init([](ChannelParams p) {
        return ParametricChannel{std::move(p)};
    }));

    m.def("derive_params", &derive_params, py::arg("model"));

    py::class_<UtilitySpec>(m, "UtilitySpec")
        .def_static("sum_throughput", [] { return UtilitySpec{UtilityKind::SumThroughput, 0.0}; })
        .def_static("energy_weighted", [](double e) { return UtilitySpec{UtilityKind::EnergyWeightedThroughput, e}; },
                    py::arg("energy_cost"))
        .def_property_readonly("energy_cost", &UtilitySpec::effective_energy);

    py::class_<MacDesign>(m, "MacDesign")
        .def_readonly("x_star", &MacDesign::x_star)
        .def_readonly("epsilon_v", &MacDesign::epsilon_v)
        .def_readonly("j_ev", &MacDesign::j_ev)
        .def_readonly("gamma_ev", &MacDesign::gamma_ev)
        .def_readonly("b", &MacDesign::b)
        .def_readonly("p_max", &MacDesign::p_max)
        .def_readonly("q_star_monotone", &MacDesign::q_star_monotone)
        .def_readonly("warnings", &MacDesign::warnings)
        .def("equilibrium_p", &MacDesign::equilibrium_p, py::arg("users"));

    py::register_exception<DesignError>(m, "DesignError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("build_design", &build_design, py::arg("params"), py::arg("utility"), py::arg("epsilon_v") = 0.01,
          py::arg("b_margin") = 0.01);
    m.def("make_design", &make_design, py::arg("params"), py::arg("utility"), py::arg("epsilon_v"), py::arg("x_star"),
          py::arg("b"));

    m.def("utility_finite", &utility_finite, py::arg("users"), py::arg("p"), py::arg("params"), py::arg("utility"));
    m.def("utility_asymptotic", &utility_asymptotic, py::arg("x"), py::arg("params"), py::arg("utility"));
    m.def("compute_x_star",
          [](const ChannelParams& p, const UtilitySpec& u, double x_hi) { return compute_x_star(p, u, x_hi).x_star; },
          py::arg("params"), py::arg("utility"), py::arg("x_hi") = 50.0);
    m.def("compute_j_ev", &compute_j_ev, py::arg("params"), py::arg("epsilon_v"));
    m.def("compute_gamma_ev", &compute_gamma_ev, py::arg("params"), py::arg("x_star"), py::arg("b"),
          py::arg("epsilon_v"), py::arg("n_max") = std::nullopt);
    m.def("optimal_p", &optimal_p, py::arg("users"), py::arg("params"), py::arg("utility"));

    m.def("q_v_identical", &q_v_identical, py::arg("p"), py::arg("users"), py::arg("params"));
    m.def("q_v_star", &q_v_star, py::arg("p_hat"), py::arg("design"));
    m.def("q_star", &q_star, py::arg("p_breve"), py::arg("design"));
    m.def("d_star", &d_star, py::arg("p_breve"), py::arg("design"));
    m.def("invert_q_v_star", &invert_q_v_star, py::arg("q_v"), py::arg("design"));
    m.def("invert_q_star", &invert_q_star, py::arg("q_k"), py::arg("design"));
    m.def("hajek_pa", &hajek_pa, py::arg("users"));
    m.def("idle_target_p", &idle_target_p, py::arg("users"), py::arg("x_star"));

    m.def("target_receiver", &target_receiver, py::arg("q_v"), py::arg("design"));
    m.def("target_two_step", &target_two_step, py::arg("p_k"), py::arg("q_k"), py::arg("design"));
    m.def("target_one_step", &target_one_step, py::arg("q_k"), py::arg("design"));

    m.def("measure_stationary_qv", &measure_stationary_qv, py::arg("p"), py::arg("users"), py::arg("channel"),
          py::arg("n_slots"), py::arg("seed") = 1);

    m.def("preset_names", &preset_names);
    m.def("preset_config", [](const std::string& name) { return to_json(preset(name)).dump(); }, py::arg("name"));
    m.def(
        "run_config",
        [](const std::string& config_json) {
            const RunConfig cfg = run_job(job_from_json(nlohmann::json::parse(config_json)));
            py::gil_scoped_release release;
            SimTrace trace = run(cfg.scenario);
            py::gil_scoped_acquire acquire;
            return trace_dict(trace);
        },
        py::arg("config_json"), "Run one simulation from a vpmac.scenario/1 JSON document");
    m.def(
        "run_preset",
        [](const std::string& name, std::optional<std::uint64_t> seed) {
            RunConfig cfg = run_job(preset(name));
            if (seed) cfg.scenario.seed = *seed;
            return trace_dict(run(cfg.scenario));
        },
        py::arg("name"), py::arg("seed") = std::nullopt);
    m.def(
        "table_preset",
        [](const std::string& name) {
            const Job job = preset(name);
            const auto* t = std::get_if<TableJob>(&job);
            if (t == nullptr) throw std::invalid_argument("expected a table preset (ex1 or ex2)");
            py::list rows;
            for (const auto& r : compute_table(*t).rows) {
                py::dict d;
                d["K"] = r.users;
                d["p_opt"] = r.p_opt;
                d["p_star"] = r.p_star;
                d["p_baseline"] = r.p_baseline;
                d["U_opt"] = r.u_opt;
                d["U_star"] = r.u_star;
                d["U_baseline"] = r.u_baseline;
                rows.append(d);
            }
            return rows;
        },
        py::arg("name"));

#ifdef VPMAC_VERSION
    m.attr("__version__") = VPMAC_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
