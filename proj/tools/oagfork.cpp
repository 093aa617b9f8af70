#include "oagfork/query.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace oagfork;

namespace {

enum Exit { kOk = 0, kMismatch = 1, kInput = 2, kInternal = 3 };

struct Flags {
    bool jsonOnly = false;
    std::string primes;
    int budgetHeight = 2;
    int budgetDenominator = 1;
    uint64_t seed = 1;
    size_t count = 500;
    std::optional<int> level;
};

std::vector<long> parse_primes(const std::string& s) {
    std::vector<long> out;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (tok.empty()) continue;
        long p;
        try {
            size_t used = 0;
            p = std::stol(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw input_error("--primes: \"" + tok + "\" is not an integer");
        }
        if (!is_prime(p)) throw input_error("--primes: " + tok + " is not prime");
        out.push_back(p);
    }
    return out;
}

Json read_json(const std::string& path) {
    std::stringstream buf;
    if (path == "-") {
        buf << std::cin.rdbuf();
    } else {
        std::ifstream f(path);
        if (!f) throw input_error(path + ": cannot open file");
        buf << f.rdbuf();
    }
    try {
        return Json::parse(buf.str());
    } catch (const Json::parse_error& e) {
        throw input_error(path + ": invalid JSON: " + e.what());
    }
}

int query_command(const std::string& task, const std::string& path, const Flags& fl) {
    Json q = read_json(path);
    if (task != "check") {
        if (!q.is_object()) throw input_error("query: expected an object");
        if (q.contains("task") && q["task"] != task)
            throw input_error("query.task: file declares \"" + q["task"].get<std::string>() + "\" but the subcommand is " + task);
        q["task"] = task;
    }
    QueryOptions o{parse_primes(fl.primes), fl.level};
    std::string summary;
    Json out = run_query(q, o, &summary);
    std::cout << out.dump() << "\n";
    if (!fl.jsonOnly) std::cerr << summary << "\n";
    return kOk;
}

int fixtures_command(const std::string& filter, const std::string& corrupt, const Flags& fl) {
    auto rows = run_fixtures(filter, corrupt);
    bool ok = true;
    for (const auto& r : rows) {
        ok = ok && r.pass;
        std::cout << Json{{"fixture", r.name}, {"pass", r.pass}, {"expected", r.expected}, {"observed", r.observed},
                          {"seconds", r.seconds}}
                         .dump()
                  << "\n";
        if (!fl.jsonOnly) {
            std::cerr << (r.pass ? "PASS " : "FAIL ") << r.name;
            if (!r.pass) std::cerr << "\n  expected: " << r.expected << "\n  observed: " << r.observed;
            std::cerr << "\n";
        }
    }
    if (!fl.jsonOnly) std::cerr << rows.size() << " fixture(s), " << (ok ? "all pass" : "mismatches found") << "\n";
    return ok ? kOk : kMismatch;
}

int oracle_command(const Flags& fl) {
    if (fl.budgetHeight < 1 || fl.budgetDenominator < 1) throw input_error("--budget-height/--budget-denominator must be positive");
    SearchBudget budget{fl.budgetHeight, fl.budgetDenominator};
    auto rep = cross_check(fl.count, fl.seed, budget);
    for (const auto& r : rep.rows)
        std::cout << Json{{"id", r.id},
                          {"verdict", r.independent ? "independent" : "dependent"},
                          {"decider_witness_verified", r.decider_witness_verified},
                          {"search_found", r.search_found},
                          {"agree", r.agree}}
                         .dump()
                  << "\n";
    Json mins = Json::array();
    for (const auto& [id, inst] : rep.minimized)
        mins.push_back({{"id", id}, {"model", to_json(*inst.model)}, {"A", to_json(inst.A)}, {"B", to_json(inst.B)}, {"C", to_json(inst.C)}});
    std::cout << Json{{"summary",
                       {{"format", kFormat},
                        {"instances", rep.rows.size()},
                        {"dependent", rep.dependent},
                        {"disagreements", rep.disagreements},
                        {"seed", fl.seed},
                        {"budget", {{"height", budget.height}, {"denominator", budget.denominator}}},
                        {"independent_status", "corroborated by bounded search, not proved"},
                        {"minimized", mins},
                        {"passed", rep.passed()}}}}
                     .dump()
              << "\n";
    if (!fl.jsonOnly)
        std::cerr << rep.rows.size() << " instances, " << rep.dependent << " dependent, " << rep.disagreements << " disagreement(s)\n";
    return rep.passed() ? kOk : kMismatch;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forking independence in ordered Abelian groups"};
    app.require_subcommand(1);
    Flags fl;
    app.add_flag("--json-only", fl.jsonOnly, "Suppress the human summary on stderr");
    app.add_option("--primes", fl.primes, "Comma-separated prime list, e.g. 2,3,5");
    app.add_option("--budget-height", fl.budgetHeight, "Coefficient height bound for witness search");
    app.add_option("--budget-denominator", fl.budgetDenominator, "Denominator bound for witness search");
    app.add_option("--seed", fl.seed, "Random seed for oracle-compare");
    app.add_option("--level", fl.level, "Override the stabilization level bound");

    std::string path, task, filter, corrupt;
    std::map<std::string, std::string> help{{"check", "Run the task declared in a query file (default: forking)"},
                                            {"classify", "Cut classification and ad-hoc values"},
                                            {"normal-form", "Normal form of an independent tuple"},
                                            {"extensions", "Invariant extension space descriptor"},
                                            {"spine", "Spine of an element"},
                                            {"ltype", "Compare ℓ-types of two tuples"},
                                            {"crt", "Lift simultaneous congruences"},
                                            {"chain", "Per-step verdicts along an enumeration"}};
    for (const auto& [name, text] : help) {
        auto* sc = app.add_subcommand(name, text)->fallthrough();
        sc->add_option("file", path, "Query JSON file, or - for stdin")->required();
        sc->callback([&task, name = name] { task = name; });
    }
    auto* fx = app.add_subcommand("fixtures", "Built-in worked-example corpus")->fallthrough()->require_subcommand(1);
    auto* fxRun = fx->add_subcommand("run", "Run the corpus, optionally filtered by name")->fallthrough();
    fxRun->add_option("filter", filter, "Substring of fixture names");
    fxRun->add_option("--corrupt", corrupt, "Harness self-test: alter this row's expectation")->group("");
    auto* oc = app.add_subcommand("oracle-compare", "Cross-check the decider against bounded witness search")->fallthrough();
    oc->add_option("--count", fl.count, "Number of random instances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kInput;
    }

    try {
        if (fxRun->parsed()) return fixtures_command(filter, corrupt, fl);
        if (oc->parsed()) return oracle_command(fl);
        return query_command(task, path, fl);
    } catch (const input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const Json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
}
