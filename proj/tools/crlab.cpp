#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "crlab/domain.hpp"
#include "crlab/errors.hpp"
#include "crlab/frames.hpp"
#include "crlab/iteration.hpp"
#include "crlab/schedule.hpp"
#include "experiments.hpp"
#include "json.hpp"

using json = nlohmann::json;
using namespace crlab;
namespace fs = std::filesystem;

namespace {

enum Exit { kPass = 0, kUsage = 1, kFail = 2, kHypothesis = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("malformed config " + path + ": " + e.what());
    }
}

void write_file(const fs::path& p, const std::string& body) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw UsageError("cannot write " + p.string());
    out << body;
}

ScheduleParams schedule_from_json(const json& j) {
    ScheduleParams p;
    p.s = j.value("s", p.s);
    p.kappa = j.value("kappa", p.kappa);
    p.mu = j.value("mu", p.mu);
    p.k = j.value("k", p.k);
    p.a = j.value("a", p.a);
    p.b = j.value("b", p.b);
    p.m = j.value("m", p.m);
    p.sigma0 = j.value("sigma0", p.sigma0);
    p.rho0 = j.value("rho0", p.rho0);
    p.n = j.value("n", p.n);
    p.eps = j.value("eps", p.eps);
    if (j.contains("log_t0")) p.log_t0 = j["log_t0"].get<double>();
    else if (j.contains("t0")) p.log_t0 = std::log(j["t0"].get<double>());
    if (j.contains("log_delta0")) p.log_delta0 = j["log_delta0"].get<double>();
    if (j.contains("delta0")) p.log_delta0 = std::log(j["delta0"].get<double>());
    if (j.contains("log_gamma0")) p.log_gamma0 = j["log_gamma0"].get<double>();
    if (j.contains("log_gamma1")) p.log_gamma1 = j["log_gamma1"].get<double>();
    if (j.contains("constants")) {
        const json& c = j["constants"];
        auto& k = p.constants;
        k.gamma0 = c.value("gamma0", k.gamma0);
        k.gamma1 = c.value("gamma1", k.gamma1);
        k.beta = c.value("beta", k.beta);
        k.c_default = c.value("c_default", k.c_default);
        if (c.contains("s_poly")) k.s_poly = c["s_poly"].get<std::vector<double>>();
        if (c.contains("c_table"))
            for (auto& [order, v] : c["c_table"].items()) k.c_table[std::stod(order)] = v.get<double>();
    }
    return p;
}

struct Common {
    std::string config;
    std::string structure = "cubic-bump";
    int resolution = 0;
    std::uint64_t seed = 1;
    int max_steps = 3;
    std::string output_dir = "out";
};

// config values fill in what the command line left unset
void merge_config(Common& c, const json& j, const CLI::App& sub) {
    auto unset = [&](const char* flag) { return sub.count(flag) == 0; };
    if (j.contains("structure") && unset("--structure")) c.structure = j["structure"].get<std::string>();
    if (j.contains("resolution") && unset("--resolution")) c.resolution = j["resolution"].get<int>();
    if (j.contains("seed") && unset("--seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("max_steps") && unset("--max-steps")) c.max_steps = j["max_steps"].get<int>();
    if (j.contains("output_dir") && unset("--output-dir")) c.output_dir = j["output_dir"].get<std::string>();
}

// name, or a JSON file {"name", "dim", "amplitude"}
struct StructureSpec {
    std::string name;
    int dim = 3;
    double amplitude = -1.0;
};

StructureSpec resolve_structure(const std::string& s, int dim, double amplitude) {
    StructureSpec r{s, dim, amplitude};
    if (s.size() > 5 && s.substr(s.size() - 5) == ".json") {
        json j = read_json(s);
        r.name = j.at("name").get<std::string>();
        r.dim = j.value("dim", dim);
        r.amplitude = j.value("amplitude", amplitude);
    }
    return r;
}

int certify(const Common& c, int J) {
    json cfg = c.config.empty() ? json::object() : read_json(c.config);
    const json& sj = cfg.contains("schedule") ? cfg["schedule"] : cfg;
    ScheduleParams p = schedule_from_json(sj);
    J = cfg.value("J", J);
    const bool given_t0 = sj.contains("t0") || sj.contains("log_t0");
    json v;
    auto adm = admissible(p);
    v["admissible"] = adm.ok;
    v["violated"] = adm.violated;
    v["J"] = J;
    const fs::path dir(c.output_dir);
    if (!adm.ok) {
        v["certified"] = false;
        write_file(dir / "verdict.json", v.dump(2) + "\n");
        std::cerr << "inadmissible parameters\n";
        return kHypothesis;
    }
    if (!given_t0) {
        try {
            auto s = find_t0(p, J);
            p.log_t0 = s.log_t0;
            v["t0_search"] = {{"evaluations", s.evaluations}, {"monotone", s.monotone}};
        } catch (const InfeasibleError& e) {
            v["certified"] = false;
            v["infeasible"] = e.what();
            write_file(dir / "verdict.json", v.dump(2) + "\n");
            std::cerr << e.what() << "\n";
            return kFail;
        }
    }
    auto ev = evolve(p, J);
    auto conv = convergence_report(p, ev);
    v["log_t0"] = p.log_t0;
    v["certified"] = ev.verdict.pass;
    v["first_failure"] = ev.verdict.first_failure;
    v["failed"] = ev.verdict.failed;
    v["log_delta0_budget"] = ev.verdict.log_delta0_budget;
    v["extrapolated_from"] = ev.verdict.extrapolated_from;
    v["lambda"] = conv.lambda;
    json series = json::array();
    for (const auto& s : conv.series)
        series.push_back({{"name", s.name},
                          {"converges", s.converges},
                          {"onset", s.onset},
                          {"limiting_log_ratio", std::isfinite(s.limiting_log_ratio) ? json(s.limiting_log_ratio) : json()},
                          {"boundary", s.boundary}});
    v["series"] = series;
    write_file(dir / "verdict.json", v.dump(2) + "\n");
    std::ostringstream csv;
    write_schedule_csv(csv, ev);
    write_file(dir / "schedule.csv", csv.str());
    std::cout << (ev.verdict.pass ? "certified" : "not certified") << ", log t0 = " << exp::num(p.log_t0) << "\n";
    return ev.verdict.pass ? kPass : kFail;
}

int iterate(const Common& c, int dim, double amplitude, double t0, bool enforce) {
    auto s = resolve_structure(c.structure, dim, amplitude);
    const int pts = c.resolution > 0 ? c.resolution : default_resolution(s.dim);
    auto run = exp::toy_iteration(s.name, s.dim, pts, s.amplitude, c.max_steps, enforce, t0);
    write_file(fs::path(c.output_dir) / "trajectory.jsonl", run.log);
    const auto& tr = run.trajectory;
    std::cout << tr.steps.size() - 1 << " steps, halted: " << tr.halted << "\n";
    if (tr.halted == "max steps") return kPass;
    for (const char* h : {"graph bound", "error bound", "smoothing margin"})
        if (tr.halted.rfind(h, 0) == 0) return kHypothesis;
    return kFail;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw UsageError("bad number in list: " + item);
        }
    }
    if (out.size() < 2) throw UsageError("need at least two values");
    return out;
}

int dilation_study(const Common& c, int dim, const std::string& rhos) {
    auto s = resolve_structure(c.structure, dim, -1.0);
    auto o = exp::dilation_study(s.name, s.dim, c.resolution > 0 ? c.resolution : 17, parse_list(rhos));
    auto t = o.table;
    t.add({"slope", exp::num(o.metrics["slope_error_sup"]), exp::num(o.metrics["slope_error_c2"]),
           exp::num(o.metrics["slope_A"]), exp::num(o.metrics["slope_B"])});
    write_file(fs::path(c.output_dir) / "dilation.csv", t.csv());
    std::cout << o.summary << "\n";
    return o.pass ? kPass : kFail;
}

int verify(const Common& c, const std::string& id) {
    const auto& ids = exp::audit_ids();
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
        std::cerr << "unknown audit id '" << id << "'; known:";
        for (const auto& k : ids) std::cerr << " " << k;
        std::cerr << "\n";
        return kUsage;
    }
    auto o = exp::run_audit(id, c.resolution, c.seed);
    write_file(fs::path(c.output_dir) / (id + ".csv"), o.table.csv());
    json v{{"id", id}, {"pass", o.pass}, {"summary", o.summary}, {"metrics", o.metrics}};
    write_file(fs::path(c.output_dir) / (id + ".json"), v.dump(2) + "\n");
    std::cout << (o.pass ? "PASS " : "FAIL ") << id << ": " << o.summary << "\n";
    return o.pass ? kPass : kFail;
}

int generate(const Common& c, int dim, double amplitude, double c2) {
    auto s = resolve_structure(c.structure, dim, amplitude);
    const int pts = c.resolution > 0 ? c.resolution : default_resolution(s.dim);
    auto lat = default_lattice(s.dim, 1.0, pts);
    json d;
    d["structure"] = s.name;
    d["dim"] = s.dim;
    d["resolution"] = pts;
    d["lattice"] = {{"n", lat->n}, {"lo", lat->lo}, {"step", lat->step}};
    if (c2 > 0.0) {
        auto dom = scaled_domain(lat, 1.0, random_graph_function(s.dim, c.seed), c2);
        auto inc = measure_inclusions(dom);
        d["graph"] = {{"seed", c.seed},
                      {"c2", c2_norm(dom)},
                      {"mask_points", dom.mask->size()},
                      {"inner_radius", inc.inner_radius},
                      {"outer_radius", inc.outer_radius}};
    }
    auto st = state_from_structure(make_structure(s.name, s.dim, s.amplitude).X, s.dim, lat);
    auto levi = levi_form(make_structure(s.name, s.dim, s.amplitude).X, s.dim);
    d["spacing"] = st.dom.spacing;
    d["mask_points"] = st.dom.mask->size();
    d["support_points"] = st.dom.support()->size();
    d["levi_eigenvalues"] = std::vector<double>(levi.eigenvalues.data(), levi.eigenvalues.data() + levi.eigenvalues.size());
    d["levi_positive"] = levi.positive;
    d["error_sup"] = sup_norm(error_form(st));
    d["error_origin"] = value_at_origin_norm(error_form(st));
    write_file(fs::path(c.output_dir) / "structure.json", d.dump(2) + "\n");
    std::cout << d.dump() << "\n";
    return levi.positive ? kPass : kHypothesis;
}

void common_flags(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "JSON config file");
    sub->add_option("--resolution", c.resolution, "lattice points per axis");
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--max-steps", c.max_steps, "iteration steps");
    sub->add_option("--output-dir", c.output_dir, "report directory");
    sub->add_option("--structure", c.structure, "structure name or JSON file");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CR embedding experiments"};
    app.require_subcommand(1);
    Common c;
    int J = 1000, dim = 3;
    double amplitude = 1e-6, t0 = 3e-3, c2 = 0.0;
    bool no_enforce = false;
    std::string rhos = "2,4,8,16", id;

    auto* cert = app.add_subcommand("certify", "certify a smoothing schedule");
    common_flags(cert, c);
    cert->add_option("-J,--steps", J, "schedule length");

    auto* it = app.add_subcommand("iterate", "run the smoothed iteration on a sampled structure");
    common_flags(it, c);
    it->add_option("--dim", dim, "real dimension");
    it->add_option("--amplitude", amplitude, "perturbation amplitude");
    it->add_option("--t0", t0, "initial smoothing parameter");
    it->add_flag("--no-enforce", no_enforce, "flag hypothesis failures instead of halting");

    auto* dil = app.add_subcommand("dilation-study", "decay of the dilated error");
    common_flags(dil, c);
    dil->add_option("--dim", dim, "real dimension");
    dil->add_option("--rhos", rhos, "comma-separated dilation factors");

    auto* ver = app.add_subcommand("verify-lemma", "run one estimate audit");
    common_flags(ver, c);
    ver->add_option("id", id, "audit id")->required();

    auto* gen = app.add_subcommand("generate-structure", "describe a sampled structure");
    common_flags(gen, c);
    gen->add_option("--dim", dim, "real dimension");
    gen->add_option("--amplitude", amplitude, "perturbation amplitude");
    gen->add_option("--c2", c2, "also sample a random graph domain with this C^2 size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    }

    try {
        for (auto* sub : {cert, it, dil, ver, gen})
            if (sub->parsed() && !c.config.empty()) merge_config(c, read_json(c.config), *sub);
        if (cert->parsed()) return certify(c, J);
        if (it->parsed()) return iterate(c, dim, amplitude, t0, !no_enforce);
        if (dil->parsed()) return dilation_study(c, dim, rhos);
        if (ver->parsed()) return verify(c, id);
        if (gen->parsed()) return generate(c, dim, amplitude, c2);
    } catch (const UsageError& e) {
        std::cerr << e.what() << "\n";
        return kUsage;
    } catch (const InadmissibleError& e) {
        std::cerr << e.what() << "\n";
        return kHypothesis;
    } catch (const HypothesisViolation& e) {
        std::cerr << e.what() << "\n";
        return kHypothesis;
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kFail;
    }
    return kUsage;
}
