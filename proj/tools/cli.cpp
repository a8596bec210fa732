#include "cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "equiplan/equiplan.hpp"

namespace equiplan::cli {
namespace {

using Cell = std::variant<std::string, double, long long>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

enum class Format { csv, json };

void emit_csv(std::ostream& out, const std::vector<Table>& tables) {
    for (std::size_t i = 0; i < tables.size(); ++i) {
        if (i) out << '\n';
        const auto& t = tables[i];
        for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
        out << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out << ',';
                if (auto s = std::get_if<std::string>(&row[c])) out << detail::csv_quote(*s);
                else if (auto d = std::get_if<double>(&row[c])) out << format_report(*d);
                else out << std::get<long long>(row[c]);
            }
            out << '\n';
        }
    }
}

void emit_json(std::ostream& out, const std::vector<Table>& tables) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& t : tables) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& row : t.rows) {
            nlohmann::ordered_json obj = nlohmann::ordered_json::object();
            for (std::size_t c = 0; c < row.size(); ++c) {
                const auto& key = t.columns[c];
                if (auto s = std::get_if<std::string>(&row[c])) obj[key] = *s;
                else if (auto d = std::get_if<double>(&row[c])) obj[key] = round_report(*d);
                else obj[key] = std::get<long long>(row[c]);
            }
            arr.push_back(std::move(obj));
        }
        doc[t.name] = std::move(arr);
    }
    out << doc.dump(2) << '\n';
}

void emit(std::ostream& out, const std::vector<Table>& tables, Format f) {
    if (f == Format::json)
        emit_json(out, tables);
    else
        emit_csv(out, tables);
}

long long as_int(std::size_t v) { return static_cast<long long>(v); }

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot write '" + path + "'");
    return f;
}

/// Per-user, per-group, per-area and per-slot tables for one plan.
std::vector<Table> metric_tables(const Scenario& sc, const AllocationPlan& plan, const MetricsReport& rep) {
    Table users{"users",
                {"user_id", "area_id", "serve_slot", "tau", "demand_mbps", "tolerance_days", "edr_mbps", "utility",
                 "normalized_utility", "satisfied"},
                {}};
    for (std::size_t u = 0; u < sc.user_count(); ++u) {
        const auto& h = sc.household(u);
        const auto& m = rep.per_user[u];
        users.rows.push_back({h.id, (long long)h.area_id, (long long)plan.serve_slot(sc.area_of(u)), sc.tau(u),
                              h.demand_mbps, (long long)h.tolerance_days, m.edr_mbps, m.utility,
                              m.normalized_utility, (long long)(m.satisfied ? 1 : 0)});
    }
    Table groups{"groups",
                 {"attribute", "value", "count", "mean_normalized_utility", "satisfied_fraction", "edr_min",
                  "edr_q25", "edr_median", "edr_q75", "edr_max"},
                 {}};
    for (const auto& g : rep.per_group)
        groups.rows.push_back({g.attribute, g.value, as_int(g.count), g.mean_normalized_utility,
                               g.satisfied_fraction, g.edr.min, g.edr.q25, g.edr.median, g.edr.q75, g.edr.max});
    Table areas{"areas", {"area_id", "serve_slot", "s_n_mbps", "utility"}, {}};
    for (std::size_t n = 0; n < sc.area_count(); ++n)
        areas.rows.push_back({(long long)sc.areas()[n].area_id, (long long)plan.serve_slot(n), plan.s[n],
                              rep.per_area[n]});
    Table slots{"slots", {"slot", "utility"}, {}};
    for (std::size_t t = 0; t < rep.per_slot.size(); ++t) slots.rows.push_back({as_int(t + 1), rep.per_slot[t]});
    return {users, groups, areas, slots};
}

double satisfied_fraction(const MetricsReport& rep) {
    if (rep.per_user.empty()) return 0.0;
    double s = 0;
    for (const auto& u : rep.per_user) s += u.satisfied ? 1 : 0;
    return s / static_cast<double>(rep.per_user.size());
}

long long served_in_time(const MetricsReport& rep) {
    long long c = 0;
    for (const auto& u : rep.per_user) c += u.utility > 0 ? 1 : 0;
    return c;
}

long long served_areas(const Scenario& sc, const AllocationPlan& plan) {
    long long c = 0;
    for (std::size_t n = 0; n < sc.area_count(); ++n) c += area_served(plan, n) ? 1 : 0;
    return c;
}

const std::vector<std::string> kGroupAttributes = {"income", "race", "education"};

struct Options {
    // global
    std::optional<double> smax_gbps;
    std::optional<int> delta;
    std::optional<double> theta;
    std::optional<std::string> tau;
    std::optional<int> horizon;
    std::uint64_t seed = 0;
    double alpha = 0.15;
    std::string format = "csv";
    bool strict_phi = false;
    // inputs and side outputs
    std::string households;
    std::string params;
    std::string plan;
    std::string plan_out;
    std::string trace_out;
    std::string progress_out;
    std::string lp_dump;
    std::size_t node_limit = kDefaultNodeLimit;
    bool per_area_split = false;
    // generate
    int areas = 10;
    int users_min = 1;
    int users_max = 5;
    std::string out_dir;
};

ScenarioParams resolve_params(const Options& o) {
    ScenarioParams p;
    if (!o.params.empty()) p = load_params(o.params, p);
    if (o.smax_gbps) p.smax_mbps = *o.smax_gbps * 1000.0;
    if (o.delta) p.freezeout = *o.delta;
    if (o.theta) p.theta = *o.theta;
    if (o.tau) p.tau_source = parse_tau_source(*o.tau);
    if (o.horizon) p.horizon = *o.horizon;
    validate_params(p);
    return p;
}

Scenario load_input(const Options& o) { return load_scenario(o.households, resolve_params(o)); }

BenchmarkConfig benchmark_config(const Options& o) {
    BenchmarkConfig c;
    c.strict = o.strict_phi;
    c.per_area_split = o.per_area_split;
    c.node_limit = o.node_limit;
    return c;
}

int cmd_generate(const Options& o, std::ostream& out) {
    GeneratorConfig cfg;
    cfg.seed = o.seed;
    cfg.n_areas = o.areas;
    cfg.users_min = o.users_min;
    cfg.users_max = o.users_max;
    cfg.params = resolve_params(o);
    auto sc = generate_scenario(cfg);
    if (o.out_dir.empty()) {
        write_households(out, sc);
        return kExitOk;
    }
    std::filesystem::create_directories(o.out_dir);
    auto households = open_out((std::filesystem::path(o.out_dir) / "households.csv").string());
    write_households(households, sc);
    auto params = open_out((std::filesystem::path(o.out_dir) / "params.txt").string());
    write_params(params, cfg.params);
    return kExitOk;
}

int cmd_solve(const Options& o, std::ostream& out, Format f) {
    auto sc = load_input(o);
    if (!o.lp_dump.empty()) {
        auto dump = open_out(o.lp_dump);
        write_lp_text(dump, build_relaxation(sc, build_user_envelopes(sc), no_forbidden_slots(sc)).lp);
    }
    auto trace = solve_heuristic(sc);
    if (!o.trace_out.empty()) {
        auto t = open_out(o.trace_out);
        write_trace_csv(t, trace);
    }
    if (!o.plan_out.empty()) {
        auto p = open_out(o.plan_out);
        write_plan(p, sc, trace.final_plan);
    }
    auto rep = compute_metrics(sc, trace.final_plan, kGroupAttributes);
    attach_bounds(rep, trace.upper_bound);
    Table summary{"summary",
                  {"solver", "users", "areas", "total_utility", "upper_bound", "gap", "lp_solves", "served_areas",
                   "satisfied_fraction"},
                  {{std::string("heuristic"), as_int(sc.user_count()), as_int(sc.area_count()), rep.total_utility,
                    rep.upper_bound, rep.gap, as_int(trace.lp_solves), served_areas(sc, trace.final_plan),
                    satisfied_fraction(rep)}}};
    std::vector<Table> tables{summary};
    auto more = metric_tables(sc, trace.final_plan, rep);
    tables.insert(tables.end(), more.begin(), more.end());
    emit(out, tables, f);
    return kExitOk;
}

int cmd_bound(const Options& o, std::ostream& out, Format f) {
    auto sc = load_input(o);
    auto heuristic = solve_heuristic(sc);
    auto res = solve_bnb(sc, o.alpha, o.node_limit);
    if (!o.progress_out.empty()) {
        auto p = open_out(o.progress_out);
        write_progress_csv(p, res);
    }
    if (!o.plan_out.empty()) {
        auto p = open_out(o.plan_out);
        write_plan(p, sc, res.best_plan);
    }
    auto rep = compute_metrics(sc, res.best_plan, kGroupAttributes);
    attach_bounds(rep, res.upper_bound);
    Table summary{"summary",
                  {"solver", "status", "alpha_target", "relaxation_upper_bound", "upper_bound", "lower_bound", "gap",
                   "nodes_explored", "heuristic_objective", "heuristic_gap"},
                  {{std::string("bnb"), std::string(to_string(res.status)), o.alpha, res.root_bound,
                    res.upper_bound, res.lower_bound, res.gap_alpha, as_int(res.nodes_explored),
                    heuristic.true_objective, certify(sc, heuristic.final_plan, res)}}};
    std::vector<Table> tables{summary};
    auto more = metric_tables(sc, res.best_plan, rep);
    tables.insert(tables.end(), more.begin(), more.end());
    emit(out, tables, f);
    return kExitOk;
}

struct BenchmarkRun {
    BenchmarkPlan plan;     // before redistribution
    BenchmarkPlan final;    // after redistribution
    AllocationPlan allocation;
};

BenchmarkRun run_benchmark(const Scenario& sc, const BenchmarkConfig& c) {
    BenchmarkRun r;
    r.plan = solve_benchmark(sc, c);
    r.final = redistribute_surplus(sc, r.plan, c.per_area_split);
    r.allocation = to_allocation_plan(sc, r.final);
    return r;
}

int cmd_benchmark(const Options& o, std::ostream& out, Format f) {
    auto sc = load_input(o);
    auto cfg = benchmark_config(o);
    auto run = run_benchmark(sc, cfg);
    if (!o.plan_out.empty()) {
        auto p = open_out(o.plan_out);
        write_plan(p, sc, run.allocation);
    }
    auto rep = compute_metrics(sc, run.allocation, kGroupAttributes);
    Table summary{"summary",
                  {"solver", "status", "served_count", "users", "total_utility", "nodes_explored", "strict_phi",
                   "split", "satisfied_fraction"},
                  {{std::string("benchmark"), std::string(to_string(run.plan.status)),
                    (long long)run.plan.served_count, as_int(sc.user_count()), rep.total_utility,
                    as_int(run.plan.nodes_explored), (long long)(cfg.strict ? 1 : 0),
                    std::string(cfg.per_area_split ? "per-area" : "global"), satisfied_fraction(rep)}}};
    std::vector<Table> tables{summary};
    if (run.plan.status == BenchmarkStatus::model_infeasible) {
        Table blocking{"blocking_users", {"user_id", "area_id", "demand_mbps", "tolerance_days"}, {}};
        for (std::size_t u : run.plan.blocking_users) {
            const auto& h = sc.household(u);
            blocking.rows.push_back({h.id, (long long)h.area_id, h.demand_mbps, (long long)h.tolerance_days});
        }
        tables.push_back(blocking);
    }
    auto more = metric_tables(sc, run.allocation, rep);
    tables.insert(tables.end(), more.begin(), more.end());
    emit(out, tables, f);
    return run.plan.status == BenchmarkStatus::model_infeasible ? kExitValidation : kExitOk;
}

/// Empirical CDF rows: users sorted by EDR (then id) within each group,
/// cdf = position / group size.
void append_cdf(Table& t, const std::string& solver, const Scenario& sc, const MetricsReport& rep) {
    std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
    std::vector<std::size_t> all(sc.user_count());
    for (std::size_t u = 0; u < all.size(); ++u) all[u] = u;
    groups.emplace_back("all", all);
    for (const auto& attr : kGroupAttributes) {
        std::map<double, std::vector<std::size_t>> by;
        for (std::size_t u = 0; u < sc.user_count(); ++u) by[attribute_value(sc.household(u), attr)].push_back(u);
        for (auto& [v, members] : by) groups.emplace_back(attr + "=" + format_report(v), members);
    }
    for (auto& [label, members] : groups) {
        std::string attr = label == "all" ? "all" : label.substr(0, label.find('='));
        std::string value = label == "all" ? "all" : label.substr(label.find('=') + 1);
        std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            if (rep.per_user[a].edr_mbps != rep.per_user[b].edr_mbps)
                return rep.per_user[a].edr_mbps < rep.per_user[b].edr_mbps;
            return sc.household(a).id < sc.household(b).id;
        });
        for (std::size_t i = 0; i < members.size(); ++i) {
            std::size_t u = members[i];
            t.rows.push_back({solver, attr, value, sc.household(u).id, rep.per_user[u].edr_mbps,
                              static_cast<double>(i + 1) / static_cast<double>(members.size())});
        }
    }
}

int cmd_compare(const Options& o, std::ostream& out, Format f) {
    auto sc = load_input(o);
    auto trace = solve_heuristic(sc);
    auto bench = run_benchmark(sc, benchmark_config(o));
    auto rh = compute_metrics(sc, trace.final_plan, kGroupAttributes);
    auto rb = compute_metrics(sc, bench.allocation, kGroupAttributes);

    auto mean_edr = [](const MetricsReport& r) {
        double s = 0;
        for (const auto& u : r.per_user) s += u.edr_mbps;
        return r.per_user.empty() ? 0.0 : s / static_cast<double>(r.per_user.size());
    };
    Table totals{"totals",
                 {"solver", "status", "total_utility", "served_in_time", "satisfied_fraction", "mean_edr_mbps"},
                 {}};
    totals.rows.push_back({std::string("heuristic"), std::string("optimal"), rh.total_utility, served_in_time(rh),
                           satisfied_fraction(rh), mean_edr(rh)});
    totals.rows.push_back({std::string("benchmark"), std::string(to_string(bench.plan.status)), rb.total_utility,
                           served_in_time(rb), satisfied_fraction(rb), mean_edr(rb)});

    Table groups{"groups",
                 {"solver", "attribute", "value", "count", "mean_normalized_utility", "satisfied_fraction",
                  "edr_min", "edr_q25", "edr_median", "edr_q75", "edr_max"},
                 {}};
    for (auto [name, rep] : {std::pair<std::string, const MetricsReport*>{"heuristic", &rh}, {"benchmark", &rb}})
        for (const auto& g : rep->per_group)
            groups.rows.push_back({name, g.attribute, g.value, as_int(g.count), g.mean_normalized_utility,
                                   g.satisfied_fraction, g.edr.min, g.edr.q25, g.edr.median, g.edr.q75,
                                   g.edr.max});

    Table cdf{"edr_cdf", {"solver", "group_attribute", "group_value", "user_id", "edr_mbps", "cdf"}, {}};
    append_cdf(cdf, "heuristic", sc, rh);
    append_cdf(cdf, "benchmark", sc, rb);
    emit(out, {totals, groups, cdf}, f);
    return kExitOk;
}

int cmd_correlate(const Options& o, std::ostream& out, Format f) {
    auto sc = load_input(o);
    auto rep = correlation_table(sc);
    Table t{"correlations", {"method", "row", "col", "n", "coefficient", "p_value", "significant", "error"}, {}};
    for (const auto& e : rep.pairs) {
        if (e.error.empty())
            t.rows.push_back({std::string(to_string(e.method)), e.row, e.col, as_int(e.n), e.coefficient, e.p_value,
                              (long long)(e.significant ? 1 : 0), std::string()});
        else
            t.rows.push_back({std::string(to_string(e.method)), e.row, e.col, as_int(e.n), std::string(),
                              std::string(), 0LL, e.error});
    }
    emit(out, {t}, f);
    return kExitOk;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err, Format f) {
    auto sc = load_input(o);
    auto plan = load_plan(o.plan, sc);
    auto found = validate_feasibility(sc, plan);
    Table summary{"summary", {"violations", "total_utility"}, {}};
    summary.rows.push_back({as_int(found.size()), found.empty() ? total_true_objective(sc, plan) : 0.0});
    Table list{"violations", {"tag", "message"}, {}};
    for (const auto& v : found) {
        list.rows.push_back({v.tag, v.message});
        err << "violation [" << v.tag << "] " << v.message << '\n';
    }
    emit(out, {summary, list}, f);
    return found.empty() ? kExitOk : kExitValidation;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Equity-aware emergency connectivity planner"};
    app.name("equiplan");
    app.require_subcommand(1);
    app.fallthrough();
    Options o;

    app.add_option("--smax-gbps", o.smax_gbps, "Total deployable capacity S_max in Gbps");
    app.add_option("--delta", o.delta, "Freeze-out delta in slots");
    app.add_option("--theta", o.theta, "Sigmoid steepness");
    app.add_option("--tau", o.tau, "Priority weight source")->check(CLI::IsMember({"income", "race", "education"}));
    app.add_option("--horizon", o.horizon, "Planning horizon T in slots");
    app.add_option("--seed", o.seed, "Random seed (default 0)");
    app.add_option("--alpha", o.alpha, "Target relative gap for branch and bound");
    app.add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--strict-phi", o.strict_phi, "Require every critical user to be served by its deadline");

    auto add_inputs = [&](CLI::App* sub) {
        sub->add_option("--households", o.households, "Household CSV")->required();
        sub->add_option("--params", o.params, "Parameter file (key = value)");
    };

    auto* gen = app.add_subcommand("generate", "Write a synthetic household table");
    gen->add_option("--areas", o.areas, "Number of areas")->check(CLI::PositiveNumber);
    gen->add_option("--users-min", o.users_min, "Fewest households per area")->check(CLI::PositiveNumber);
    gen->add_option("--users-max", o.users_max, "Most households per area")->check(CLI::PositiveNumber);
    gen->add_option("--params", o.params, "Parameter file (key = value)");
    gen->add_option("--out-dir", o.out_dir, "Write households.csv and params.txt here instead of stdout");

    auto* solve = app.add_subcommand("solve", "Rounding heuristic plus metrics");
    add_inputs(solve);
    solve->add_option("--plan-out", o.plan_out, "Write the plan CSV");
    solve->add_option("--trace-out", o.trace_out, "Write the per-iteration trace CSV");
    solve->add_option("--lp-dump", o.lp_dump, "Write the root relaxation LP as text");

    auto* bound = app.add_subcommand("bound", "Relaxation bound and branch and bound gap");
    add_inputs(bound);
    bound->add_option("--node-limit", o.node_limit, "Node budget");
    bound->add_option("--progress-out", o.progress_out, "Write the convergence log CSV");
    bound->add_option("--plan-out", o.plan_out, "Write the incumbent plan CSV");

    auto* bench = app.add_subcommand("benchmark", "Served-user-count benchmark plus metrics");
    add_inputs(bench);
    bench->add_option("--node-limit", o.node_limit, "Node budget");
    bench->add_flag("--per-area-split", o.per_area_split, "Split leftover capacity per area");
    bench->add_option("--plan-out", o.plan_out, "Write the plan CSV");

    auto* compare = app.add_subcommand("compare", "Heuristic and benchmark side by side");
    add_inputs(compare);
    compare->add_option("--node-limit", o.node_limit, "Benchmark node budget");
    compare->add_flag("--per-area-split", o.per_area_split, "Split leftover capacity per area");

    auto* correlate = app.add_subcommand("correlate", "Attribute correlation tables");
    add_inputs(correlate);

    auto* validate = app.add_subcommand("validate", "Feasibility check of a plan file");
    add_inputs(validate);
    validate->add_option("--plan", o.plan, "Plan CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        for (const auto* sub : app.get_subcommands()) target = sub;
        out << target->help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    if (!(o.alpha > 0) || !(o.alpha < 1)) {
        err << "usage error: --alpha must lie in (0, 1)\n";
        return kExitUsage;
    }
    const Format f = o.format == "json" ? Format::json : Format::csv;
    try {
        if (gen->parsed()) return cmd_generate(o, out);
        if (solve->parsed()) return cmd_solve(o, out, f);
        if (bound->parsed()) return cmd_bound(o, out, f);
        if (bench->parsed()) return cmd_benchmark(o, out, f);
        if (compare->parsed()) return cmd_compare(o, out, f);
        if (correlate->parsed()) return cmd_correlate(o, out, f);
        if (validate->parsed()) return cmd_validate(o, out, err, f);
    } catch (const ArgumentError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitUsage;
}

}  // namespace equiplan::cli
