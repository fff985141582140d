// Copyright 2026 The kesten authors.
// SPDX-License-Identifier: Apache-2.0

// kesten: ingest survey data, fit model parameters, simulate populations and
// render reports. Wealth is in GBP throughout; the model is not scale invariant.
//
// Exit codes: 0 success, 2 input error, 3 numeric or regime error.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kesten/io.hpp"
#include "kesten/kesten.hpp"
#include "kesten/svg.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace kesten;

namespace {

constexpr std::size_t kMaxAgents = 23'000'000;

std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(path.string(), 0, "cannot open file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return io::hex64(io::fnv1a64(ss.str()));
}

json read_json(const fs::path& path) {
    auto in = io::open_input(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string(), 0, e.what());
    }
}

/// Re-tag library input errors with the file they came from.
template <class F>
auto with_file(const fs::path& path, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ParseError&) {
        throw;
    } catch (const InputError& e) {
        throw ParseError(path.string(), 0, e.what());
    }
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw InvalidArgument("cannot create directory " + dir.string() + ": " + ec.message());
    }
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

struct IngestArgs {
    std::string survey;
    std::string meta;
    std::string rich;
    std::string out;
};

int cmd_ingest(const IngestArgs& a) {
    const auto survey = io::read_survey(a.survey, a.meta);
    auto tail = with_file(a.survey, [&] { return lorenz_to_tail(survey); });
    const std::size_t survey_points = tail.points.size();
    std::size_t rich_points = 0;
    if (!a.rich.empty()) {
        const auto rich = io::read_rich_list(a.rich, survey.households_total, survey.year);
        rich_points = rich.wealth.size();
        tail = with_file(a.rich, [&] { return merge_rich_list(tail, rich); });
    }
    ensure_dir(a.out);
    io::write_text(fs::path(a.out) / "tail.csv", io::tail_csv(tail));

    json m;
    m["command"] = "ingest";
    m["version"] = kVersion;
    m["year"] = survey.year;
    m["households"] = survey.households_total;
    m["total_wealth_gbp"] = survey.total_wealth;
    json inputs;
    inputs["survey"] = {{"path", a.survey}, {"digest", file_digest(a.survey)}};
    inputs["meta"] = {{"path", a.meta}, {"digest", file_digest(a.meta)}};
    if (!a.rich.empty()) {
        inputs["rich"] = {{"path", a.rich}, {"digest", file_digest(a.rich)}};
    }
    m["inputs"] = inputs;
    m["survey_points"] = survey_points;
    m["rich_points"] = rich_points;
    m["tail_points"] = tail.points.size();
    m["outputs"] = {"tail.csv"};
    m["status"] = "complete";
    io::write_text(fs::path(a.out) / "manifest.json", m.dump(2) + "\n");

    std::cout << "households " << io::format_double(survey.households_total) << '\n'
              << "total_wealth_gbp " << io::format_double(survey.total_wealth) << '\n'
              << "survey_points " << survey_points << '\n'
              << "rich_points " << rich_points << '\n'
              << "tail_points " << tail.points.size() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
    std::vector<std::string> tails;
    std::string billionaires;
    std::string alpha_samples;
    std::string deciles;
    double kappa1 = 1e6;
    std::optional<double> gamma;
    double period = 2.0;
    bool per_period = false;
    std::string out = "params.json";
};

int cmd_fit(const FitArgs& a) {
    json params;
    json diag;

    std::optional<SavingsModel> savings;
    if (!a.deciles.empty()) {
        const auto rows = io::read_deciles(a.deciles);
        std::vector<SavingsPoint> pts;
        for (const auto& r : rows) {
            pts.push_back(r.point());
        }
        const auto fit = with_file(a.deciles, [&] { return fit_savings(pts, a.kappa1); });
        savings = fit.model;
        params["savings"] = {{"kappa1", fit.model.kappa1()}, {"kappa2", fit.model.kappa2()}, {"kappa3", fit.model.kappa3()}};
        diag["savings_residual_ss"] = fit.residual_ss;
    }

    std::vector<ReturnPoint> was;
    std::vector<std::vector<ReturnPoint>> periods;
    if (!a.tails.empty()) {
        if (a.tails.size() < 2) {
            throw InsufficientPoints("return fits need at least two --tail files");
        }
        std::vector<EmpiricalTail> tails;
        for (const auto& t : a.tails) {
            tails.push_back(io::read_tail_csv(t));
        }
        for (std::size_t i = 0; i + 1 < tails.size(); ++i) {
            const auto series = with_file(a.tails[i + 1], [&] {
                return percentile_ror(tails[i], tails[i + 1], savings.value_or(SavingsModel::zero()), a.period);
            });
            const auto pts = return_points(series);
            was.insert(was.end(), pts.begin(), pts.end());
            periods.push_back(pts);
        }
    }

    std::vector<ReturnPoint> bill;
    std::vector<WealthPair> pairs;
    if (!a.billionaires.empty()) {
        pairs = io::read_wealth_pairs(a.billionaires);
        bill = return_points(pairs);
    }

    std::optional<double> gamma = a.gamma;
    if (!gamma && !was.empty() && !bill.empty()) {
        const auto sel = select_gamma(was, bill);
        gamma = sel.gamma;
        diag["gamma_selection"] = {{"gamma", sel.gamma}, {"objective", sel.objective}, {"no_crossing", sel.no_crossing}};
        if (sel.no_crossing) {
            std::cerr << "warning: mean alpha of the two datasets does not cross on [1, 1.5]; using the boundary\n";
        }
    }

    if (!was.empty()) {
        const auto fit = fit_ror_power(was, gamma);
        params["gamma"] = fit.gamma;
        params["mu"] = fit.mu;
        params["sigma"] = fit.sigma;
        diag["ror_points"] = was.size();
        diag["ror_used_points"] = fit.used_points;
        diag["ror_excluded_nonpositive"] = fit.excluded_nonpositive;
        diag["ror_gamma_fixed"] = fit.gamma_fixed;
        diag["ror_r_squared"] = fit.r_squared;
        gamma = fit.gamma;
        if (a.per_period) {
            json per = json::array();
            for (const auto& pts : periods) {
                try {
                    const auto pf = fit_ror_power(pts, a.gamma);
                    per.push_back({{"gamma", pf.gamma}, {"mu", pf.mu}, {"points", pts.size()}});
                } catch (const InputError& e) {
                    per.push_back({{"error", e.what()}, {"points", pts.size()}});
                }
            }
            diag["per_period"] = per;
        }
    } else if (gamma) {
        params["gamma"] = *gamma;
    }

    std::vector<double> alpha;
    if (!a.alpha_samples.empty()) {
        alpha = io::read_values(a.alpha_samples, "alpha");
    } else if (!pairs.empty()) {
        alpha = extract_alpha(std::span<const WealthPair>(pairs), gamma.value_or(1.0));
    }
    if (!alpha.empty()) {
        const auto fit = fit_nct_mle(alpha);
        params["nct"] = {{"k", fit.params.k}, {"c", fit.params.c}, {"l", fit.params.l}, {"s", fit.params.s}};
        diag["nct_samples"] = alpha.size();
        diag["nct_log_likelihood"] = fit.log_likelihood;
        diag["nct_converged"] = fit.converged;
        if (!params.contains("sigma")) {
            params["sigma"] = std::sqrt(numeric::mean_variance(alpha).variance);
        }
    }
    if (params.empty()) {
        throw InvalidArgument("nothing to fit: pass --tail, --billionaires, --alpha-samples or --deciles");
    }
    params["diagnostics"] = diag;
    io::write_text(a.out, params.dump(2) + "\n");
    std::cout << params.dump(2) << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::string params;
    std::optional<double> gamma;
    std::optional<double> premultiplier;
    std::optional<std::string> init;
    std::optional<std::string> replacement;
    std::optional<std::string> savings;
    std::optional<std::size_t> agents;
    std::optional<std::uint32_t> horizon;
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<std::uint32_t>> observe;
    std::optional<bool> truncate;
    unsigned threads = 0;
    std::string out;
};

/// Resolved simulation settings, in the textual form recorded in the manifest.
struct Settings {
    double gamma = 1.075;
    double premultiplier = 1.0;
    NctParams nct = billionaire_nct();
    bool truncate_positive = false;
    std::string init = "constant:10000";
    std::string replacement = "r1";
    std::string savings = "none";
    std::size_t agents = 100000;
    std::uint32_t horizon = 300;
    std::optional<std::uint64_t> seed;
    std::vector<std::uint32_t> observe;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) {
        out.push_back(part);
    }
    return out;
}

double parse_number(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw InvalidArgument(what + ": not a number: '" + s + "'");
    }
    return v;
}

InitialCondition parse_init(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    const auto args = split(rest, ':');
    auto need = [&](std::size_t n) {
        if (args.size() != n) {
            throw InvalidArgument("--init " + kind + " takes " + std::to_string(n) + " argument(s): '" + spec + "'");
        }
    };
    if (kind == "constant") {
        need(1);
        return ConstantInit{parse_number(args[0], "--init constant")};
    }
    if (kind == "shifted-exp") {
        need(2);
        return ShiftedExpInit{parse_number(args[0], "--init shifted-exp"), parse_number(args[1], "--init shifted-exp")};
    }
    if (kind == "exp") {
        need(1);
        return ExpInit{parse_number(args[0], "--init exp")};
    }
    if (kind == "pareto") {
        need(2);
        return ParetoInit{ParetoParams(parse_number(args[0], "--init pareto"), parse_number(args[1], "--init pareto"))};
    }
    if (kind == "bootstrap") {
        if (rest.empty()) {
            throw InvalidArgument("--init bootstrap needs a tail CSV path");
        }
        return BootstrapInit{io::read_tail_csv(rest)};
    }
    throw InvalidArgument("unknown initial condition '" + kind + "' (constant, shifted-exp, exp, pareto, bootstrap)");
}

Replacement parse_replacement(const std::string& s) {
    if (s == "r1") return Replacement::R1;
    if (s == "r2") return Replacement::R2;
    if (s == "r3") return Replacement::R3;
    throw InvalidArgument("unknown replacement '" + s + "' (r1, r2, r3)");
}

SavingsModel parse_savings(const std::string& s) {
    if (s == "none") {
        return SavingsModel::zero();
    }
    if (s == "uk") {
        return uk_savings();
    }
    const auto parts = split(s, ',');
    if (parts.size() != 3) {
        throw InvalidArgument("--savings takes none, uk or kappa1,kappa2,kappa3");
    }
    return SavingsModel::logistic(parse_number(parts[0], "kappa1"), parse_number(parts[1], "kappa2"),
                                  parse_number(parts[2], "kappa3"));
}

std::string savings_text(const json& j) {
    if (j.is_string()) {
        return j.get<std::string>();
    }
    return io::format_double(j.at("kappa1").get<double>()) + "," + io::format_double(j.at("kappa2").get<double>()) +
           "," + io::format_double(j.at("kappa3").get<double>());
}

void apply_json(Settings& s, const json& j, bool from_params) {
    if (j.contains("gamma")) s.gamma = j["gamma"].get<double>();
    if (j.contains("nct")) {
        const auto& n = j["nct"];
        s.nct = NctParams(n.at("k").get<double>(), n.at("c").get<double>(), n.at("l").get<double>(), n.at("s").get<double>());
    }
    if (j.contains("savings")) s.savings = savings_text(j["savings"]);
    if (from_params) {
        return;
    }
    if (j.contains("premultiplier")) s.premultiplier = j["premultiplier"].get<double>();
    if (j.contains("truncate_positive")) s.truncate_positive = j["truncate_positive"].get<bool>();
    if (j.contains("init")) s.init = j["init"].get<std::string>();
    if (j.contains("replacement")) s.replacement = j["replacement"].get<std::string>();
    if (j.contains("agents")) s.agents = j["agents"].get<std::size_t>();
    if (j.contains("horizon")) s.horizon = j["horizon"].get<std::uint32_t>();
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("observe")) s.observe = j["observe"].get<std::vector<std::uint32_t>>();
}

std::string tail_name(std::uint32_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "tail_n%03u.csv", n);
    return buf;
}

int cmd_simulate(const SimulateArgs& a) {
    // Precedence: flags > config file > params file > defaults.
    Settings s;
    json inputs = json::object();
    if (!a.params.empty()) {
        with_file(a.params, [&] { apply_json(s, read_json(a.params), true); });
        inputs["params"] = {{"path", a.params}, {"digest", file_digest(a.params)}};
    }
    if (!a.config.empty()) {
        try {
            with_file(a.config, [&] { apply_json(s, read_json(a.config), false); });
        } catch (const json::exception& e) {
            throw ParseError(a.config, 0, e.what());
        }
        inputs["config"] = {{"path", a.config}, {"digest", file_digest(a.config)}};
    }
    if (a.gamma) s.gamma = *a.gamma;
    if (a.premultiplier) s.premultiplier = *a.premultiplier;
    if (a.truncate) s.truncate_positive = *a.truncate;
    if (a.init) s.init = *a.init;
    if (a.replacement) s.replacement = *a.replacement;
    if (a.savings) s.savings = *a.savings;
    if (a.agents) s.agents = *a.agents;
    if (a.horizon) s.horizon = *a.horizon;
    if (a.seed) s.seed = *a.seed;
    if (a.observe) s.observe = *a.observe;

    if (!s.seed) {
        throw InvalidArgument("a seed is required (--seed or \"seed\" in the config file)");
    }
    if (s.agents < 1 || s.agents > kMaxAgents) {
        throw InvalidArgument("--agents must lie in [1, 2.3e7]");
    }

    SimulationConfig config;
    config.gamma = s.gamma;
    config.alpha.nct = s.nct;
    config.alpha.premultiplier = s.premultiplier;
    config.alpha.truncate_positive = s.truncate_positive;
    config.initial = parse_init(s.init);
    config.replacement = parse_replacement(s.replacement);
    config.savings = parse_savings(s.savings);
    config.n_agents = s.agents;
    config.horizon = s.horizon;
    config.master_seed = *s.seed;
    config.validate();
    if (s.init.rfind("bootstrap:", 0) == 0) {
        const auto path = s.init.substr(10);
        inputs["bootstrap"] = {{"path", path}, {"digest", file_digest(path)}};
    }
    auto times = s.observe.empty() ? default_observation_times(config) : s.observe;
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    times.erase(std::remove_if(times.begin(), times.end(), [&](std::uint32_t t) { return t > config.horizon; }),
                times.end());

    json cfg;
    cfg["gamma"] = s.gamma;
    cfg["premultiplier"] = s.premultiplier;
    cfg["nct"] = {{"k", s.nct.k}, {"c", s.nct.c}, {"l", s.nct.l}, {"s", s.nct.s}};
    cfg["truncate_positive"] = s.truncate_positive;
    cfg["init"] = s.init;
    cfg["replacement"] = s.replacement;
    cfg["savings"] = s.savings;
    cfg["agents"] = s.agents;
    cfg["horizon"] = s.horizon;
    cfg["seed"] = *s.seed;
    cfg["observe"] = times;
    const std::string config_hash = io::hex64(io::fnv1a64(cfg.dump() + inputs.dump()));

    std::vector<std::string> outputs;
    for (auto t : times) {
        outputs.push_back(tail_name(t));
    }
    outputs.push_back("inequality.csv");
    outputs.push_back("checkpoint.csv");
    outputs.push_back("checkpoint.json");

    const fs::path out(a.out);
    ensure_dir(out);
    json manifest;
    manifest["command"] = "simulate";
    manifest["version"] = kVersion;
    manifest["wealth_unit"] = "GBP";
    manifest["config"] = cfg;
    manifest["config_hash"] = config_hash;
    manifest["seed"] = *s.seed;
    manifest["inputs"] = inputs;
    manifest["observation_times"] = times;
    manifest["outputs"] = outputs;
    manifest["status"] = "running";
    io::write_text(out / "manifest.json", manifest.dump(2) + "\n");

    std::ofstream ineq(out / "inequality.csv", std::ios::binary);
    ineq << "n,gini,s01,bankruptcies\n";
    RunOptions opts;
    opts.observation_times = times;
    opts.threads = a.threads ? a.threads : default_thread_count();
    opts.summary_every = 1;
    opts.on_step = [&](const Population& pop) {
        const auto sum = summarize(pop);
        ineq << sum.step << ',' << io::format_double(sum.gini) << ',' << io::format_double(sum.top1) << ','
             << sum.bankruptcies << '\n';
    };
    opts.on_observe = [&](const Population& pop, const StepSummary&) {
        io::write_text(out / tail_name(pop.step), io::tail_csv(empirical_tail(pop.wealth)));
    };
    try {
        auto result = run(config, opts);
        ineq.close();
        io::write_checkpoint(out / "checkpoint", result.final_population, *s.seed, config_hash);
        manifest["status"] = "complete";
        io::write_text(out / "manifest.json", manifest.dump(2) + "\n");
        const auto& last = result.observations.empty() ? summarize(result.final_population) : result.observations.back();
        std::cout << "step " << last.step << " gini " << io::format_double(last.gini) << " s01 "
                  << io::format_double(last.top1) << " bankruptcies " << last.bankruptcies << '\n';
    } catch (const OverflowError& e) {
        ineq.close();
        manifest["status"] = "failed";
        manifest["error"] = {{"kind", "Overflow"}, {"step", e.step()}, {"agent", e.agent()}, {"message", e.what()}};
        io::write_text(out / "manifest.json", manifest.dump(2) + "\n");
        throw;
    } catch (const AllBankrupt& e) {
        ineq.close();
        manifest["status"] = "failed";
        manifest["error"] = {{"kind", "AllBankrupt"}, {"step", e.step()}, {"message", e.what()}};
        io::write_text(out / "manifest.json", manifest.dump(2) + "\n");
        throw;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportArgs {
    std::string run;
    std::string out;
    std::vector<double> fit_window;  // empty: default window per tail
};

svg::Series power_law_overlay(const PowerLawFit& fit, const std::string& label, const std::string& color) {
    svg::Series s;
    s.label = label;
    s.color = color;
    s.markers = false;
    for (double lw = std::log10(fit.window.lo); lw <= std::log10(fit.window.hi) + 1e-9; lw += 0.05) {
        const double w = std::pow(10.0, lw);
        s.x.push_back(w);
        s.y.push_back(fit.alpha_coef * std::pow(w, -fit.beta));
    }
    return s;
}

svg::Plot tail_plot(const EmpiricalTail& tail, const std::string& title, const std::vector<double>& window,
                    std::vector<std::string>& notes) {
    svg::Plot plot;
    plot.title = title;
    plot.x_label = "wealth (GBP)";
    plot.y_label = "P(X > w)";
    plot.log_x = true;
    plot.log_y = true;
    svg::Series data;
    data.label = "empirical tail";
    for (const auto& p : tail.points) {
        if (p.exceedance > 0.0 && p.wealth > 0.0) {
            data.x.push_back(p.wealth);
            data.y.push_back(p.exceedance);
        }
    }
    plot.series.push_back(data);
    try {
        const auto fit = window.empty() ? fit_power_law(tail) : fit_power_law(tail, FitWindow{window[0], window[1]});
        plot.series.push_back(
            power_law_overlay(fit, "beta = " + io::format_double(std::round(fit.beta * 1000) / 1000), svg::palette(1)));
        notes.push_back("beta " + io::format_double(fit.beta) + " window [" + io::format_double(fit.window.lo) + ", " +
                        io::format_double(fit.window.hi) + "] r2 " + io::format_double(fit.r_squared));
    } catch (const InputError& e) {
        notes.push_back(std::string("no power-law fit: ") + e.what());
    }
    return plot;
}

int cmd_report(const ReportArgs& a) {
    const fs::path run(a.run);
    const fs::path out = a.out.empty() ? run : fs::path(a.out);
    if (!fs::exists(run / "manifest.json")) {
        throw MissingArtifact("no manifest.json in " + run.string());
    }
    if (!a.fit_window.empty() && (a.fit_window.size() != 2 || !(a.fit_window[0] < a.fit_window[1]))) {
        throw InvalidArgument("--fit-window takes LO,HI with LO < HI");
    }
    const auto manifest = read_json(run / "manifest.json");
    ensure_dir(out);
    std::ostringstream summary;
    const std::string command = manifest.value("command", "");
    summary << "run " << run.string() << " (" << command << ")\n";

    if (command == "ingest") {
        if (!fs::exists(run / "tail.csv")) {
            throw MissingArtifact("tail.csv missing from " + run.string());
        }
        const auto tail = io::read_tail_csv(run / "tail.csv");
        std::vector<std::string> notes;
        auto plot = tail_plot(tail, "Empirical wealth tail", a.fit_window, notes);
        // Separate fit of the top decades, where rich-list points dominate.
        if (tail.points.size() > 3) {
            const double top = tail.points.back().wealth;
            try {
                const auto upper = fit_power_law(tail, FitWindow{top / 1e3, top});
                plot.series.push_back(power_law_overlay(upper, "upper beta = " +
                                                        io::format_double(std::round(upper.beta * 1000) / 1000),
                                                        svg::palette(2)));
                notes.push_back("upper beta " + io::format_double(upper.beta));
            } catch (const InputError&) {
            }
        }
        io::write_text(out / "tail.svg", svg::render(plot));
        for (const auto& n : notes) {
            summary << "tail: " << n << '\n';
        }
        io::write_text(out / "summary.txt", summary.str());
        return 0;
    }
    if (command != "simulate") {
        throw MissingArtifact("manifest in " + run.string() + " names no known command");
    }

    const auto times = manifest.at("observation_times").get<std::vector<std::uint32_t>>();
    for (auto t : times) {
        const auto name = tail_name(t);
        if (!fs::exists(run / name)) {
            throw MissingArtifact(name + " missing from " + run.string());
        }
        const auto tail = io::read_tail_csv(run / name);
        std::vector<std::string> notes;
        const auto plot = tail_plot(tail, "Wealth tail at n = " + std::to_string(t), a.fit_window, notes);
        io::write_text(out / (name.substr(0, name.size() - 4) + ".svg"), svg::render(plot));
        for (const auto& n : notes) {
            summary << "n=" << t << ": " << n << '\n';
        }
    }

    if (!fs::exists(run / "inequality.csv")) {
        throw MissingArtifact("inequality.csv missing from " + run.string());
    }
    const auto ineq = io::read_csv(run / "inequality.csv", {"n", "gini", "s01", "bankruptcies"});
    svg::Plot ip;
    ip.title = "Inequality over time";
    ip.x_label = "n";
    ip.y_label = "share";
    svg::Series g{"Gini", {}, {}, svg::palette(0), false};
    svg::Series s01{"top 1% share", {}, {}, svg::palette(1), false};
    for (const auto& r : ineq.rows) {
        g.x.push_back(r[0]);
        g.y.push_back(r[1]);
        s01.x.push_back(r[0]);
        s01.y.push_back(r[2]);
    }
    ip.series = {g, s01};
    io::write_text(out / "inequality.svg", svg::render(ip));
    if (!ineq.rows.empty()) {
        const auto& last = ineq.rows.back();
        summary << "final n=" << last[0] << " gini " << io::format_double(last[1]) << " s01 " << io::format_double(last[2])
                << " bankruptcies " << io::format_double(last[3]) << '\n';
    }

    // Density of the alpha law used by the run.
    const auto& cfg = manifest.at("config");
    AlphaLaw law;
    law.nct = NctParams(cfg.at("nct").at("k").get<double>(), cfg.at("nct").at("c").get<double>(),
                        cfg.at("nct").at("l").get<double>(), cfg.at("nct").at("s").get<double>());
    law.premultiplier = cfg.at("premultiplier").get<double>();
    law.truncate_positive = cfg.at("truncate_positive").get<bool>();
    std::vector<double> draws;
    for (std::uint32_t i = 0; i < 20000; ++i) {
        RngStream rng(manifest.at("seed").get<std::uint64_t>(), i, 0, StreamPurpose::Generic);
        draws.push_back(law.sample(rng));
    }
    std::sort(draws.begin(), draws.end());
    // Central 98% keeps the heavy tails from flattening the plot.
    const std::vector<double> core(draws.begin() + 200, draws.end() - 200);
    const auto kde = kernel_density(core);
    svg::Plot dp;
    dp.title = "Density of alpha";
    dp.x_label = "alpha";
    dp.y_label = "density";
    dp.series.push_back({"kernel density", kde.x, kde.density, svg::palette(0), false});
    std::vector<double> exact;
    for (double x : kde.x) {
        exact.push_back(nct_pdf(law.nct, x / law.premultiplier) / law.premultiplier);
    }
    if (!law.truncate_positive) {
        dp.series.push_back({"nct density", kde.x, exact, svg::palette(1), false});
    }
    io::write_text(out / "alpha_density.svg", svg::render(dp));
    summary << "alpha: kernel bandwidth " << io::format_double(kde.bandwidth) << '\n';
    io::write_text(out / "summary.txt", summary.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-linear Kesten wealth model: ingest, fit, simulate, report. Wealth unit: GBP."};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    IngestArgs ia;
    auto* ingest = app.add_subcommand("ingest", "Survey Lorenz data (+ rich list) to an empirical tail CSV");
    ingest->add_option("--survey", ia.survey, "Lorenz CSV: cum_household_prop,cum_wealth_prop")->required();
    ingest->add_option("--meta", ia.meta, "Survey metadata JSON: year, households, total_wealth_gbp")->required();
    ingest->add_option("--rich", ia.rich, "Rich list CSV: rank,wealth_gbp");
    ingest->add_option("--out", ia.out, "Output directory")->required();

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "Fit return, alpha and savings parameters");
    fit->add_option("--tail", fa.tails, "Tail CSV per survey period, in time order (repeatable)");
    fit->add_option("--billionaires", fa.billionaires, "Yearly pairs CSV: wealth_gbp,next_wealth_gbp");
    fit->add_option("--alpha-samples", fa.alpha_samples, "Alpha sample CSV with column alpha");
    fit->add_option("--deciles", fa.deciles, "Deciles CSV: median_wealth_gbp,disposable_income_gbp,expenditure_gbp");
    fit->add_option("--kappa1", fa.kappa1, "Fixed savings ceiling kappa1 (GBP)")->capture_default_str();
    fit->add_option("--gamma", fa.gamma, "Fix gamma; only mu is fitted");
    fit->add_option("--period", fa.period, "Years between consecutive tails")->capture_default_str();
    fit->add_flag("--per-period", fa.per_period, "Also report separate return fits per survey period");
    fit->add_option("--out", fa.out, "Output JSON")->capture_default_str();

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Simulate a population of agents");
    sim->add_option("--config", sa.config, "Simulation config JSON");
    sim->add_option("--params", sa.params, "params.json from fit (gamma, nct, savings)");
    sim->add_option("--gamma", sa.gamma, "Return exponent gamma >= 1");
    sim->add_option("--premultiplier", sa.premultiplier, "Scale applied to nct alpha draws");
    sim->add_flag("--truncate-positive{true},--no-truncate-positive{false}", sa.truncate,
                  "Condition alpha on being positive");
    sim->add_option("--init", sa.init,
                    "constant:W | shifted-exp:FLOOR:MEAN | exp:MEAN | pareto:XM:BETA | bootstrap:TAIL.csv");
    sim->add_option("--replacement", sa.replacement, "r1 | r2 | r3");
    sim->add_option("--savings", sa.savings, "none | uk | kappa1,kappa2,kappa3");
    sim->add_option("--agents,--n", sa.agents, "Number of agents (default 1e5, at most 2.3e7)");
    sim->add_option("--horizon", sa.horizon, "Number of steps");
    sim->add_option("--seed", sa.seed, "Master seed (required)");
    sim->add_option("--observe", sa.observe, "Observation times")->delimiter(',');
    sim->add_option("--threads", sa.threads, "Worker threads (default: KESTEN_THREADS or hardware)");
    sim->add_option("--out", sa.out, "Output directory")->required();

    ReportArgs ra;
    auto* report = app.add_subcommand("report", "Render SVG plots and a summary for a run directory");
    report->add_option("--run", ra.run, "Run directory")->required();
    report->add_option("--out", ra.out, "Output directory (default: the run directory)");
    report->add_option("--fit-window", ra.fit_window, "Power-law fit window LO,HI in GBP")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*ingest) return cmd_ingest(ia);
        if (*fit) return cmd_fit(fa);
        if (*sim) return cmd_simulate(sa);
        if (*report) return cmd_report(ra);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed JSON value: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
