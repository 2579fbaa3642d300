// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#include "srvscan/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace srvscan {

using nlohmann::json;

void map_trace_selectors(std::vector<TransactionTrace>& traces, const ContractModel& m) {
    std::map<std::string, std::string> names;
    for (const auto& f : m.functions)
        if (f.selector) names[selector_to_hex(*f.selector)] = f.name;
    for (auto& t : traces)
        for (auto& c : t.calls) {
            std::string lower = c;
            std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
            if (auto it = names.find(lower); it != names.end()) c = it->second;
        }
}

AnalysisResult run_analysis(const AnalysisConfig& cfg) {
    if (cfg.fsm_k == 0) throw Error(ErrorCode::InvalidArgument, "fsm k must be positive");
    if (cfg.min_support == 0) throw Error(ErrorCode::InvalidArgument, "min support must be positive");
    if (cfg.timeout.count() <= 0) throw Error(ErrorCode::InvalidArgument, "timeout must be positive");

    AnalysisResult r;
    const Deadline deadline(cfg.timeout);
    try {
        if (cfg.kind == InputKind::Bytecode) {
            const auto bytes = evm::decode_code_input(cfg.input);
            r.frontend = evm::analyze_bytecode(bytes, deadline);
            r.model = r.frontend->lifted.model;
            r.lift_warnings = r.frontend->lifted.warnings;
        } else {
            r.model = load_model(cfg.input);
        }
        const ContractModel& m = *r.model;
        deadline.check();
        r.rw = extract_rw(m);
        r.asd = extract_asd(m);

        std::vector<TsdEdge> usable;
        if (cfg.traces_jsonl) {
            auto traces = ingest_traces(*cfg.traces_jsonl);
            map_trace_selectors(traces, m);
            if (traces.empty()) {
                r.notes.push_back("trace file holds no records");
            } else {
                r.fsm = merge_states(build_initial_fsm(traces), cfg.fsm_k, deadline);
                r.tsd = extract_tsd(*r.fsm, cfg.min_support);
                for (const auto& e : r.tsd) {
                    if (m.find_function(e.dependent) && m.find_function(e.prerequisite)) usable.push_back(e);
                    else r.notes.push_back("TSD edge " + e.dependent + " <- " + e.prerequisite + " names a function outside the model");
                }
            }
        }
        deadline.check();
        r.sdg = build_sdg(m, r.rw, r.asd, usable);
        deadline.check();
        DetectOptions opts;
        opts.use_tsd = cfg.use_tsd;
        if (r.frontend)
            opts.low_confidence_functions.insert(r.frontend->lifted.low_confidence_functions.begin(),
                                                 r.frontend->lifted.low_confidence_functions.end());
        r.detection = detect(m, *r.sdg, opts);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Timeout) throw;
        r.timed_out = true;
        r.notes.push_back(e.what());
    }
    return r;
}

namespace {

std::string var_name(const ContractModel& m, const VarKey& k) {
    const auto* v = m.find_var(k);
    return v ? var_label(*v) : var_label({k.slot, k.kind, std::nullopt});
}

json indicator_json(const ContractModel& m, const Indicator& i) {
    json j{{"rule", std::string(rule_name(i.rule))}, {"function", i.function}, {"site", i.site}};
    if (i.var) j["var"] = var_name(m, *i.var);
    if (i.atom) j["atom"] = std::string(env_atom_name(*i.atom));
    if (i.call_site) j["call_site"] = *i.call_site;
    j["access_control"] = "absent";
    return j;
}

json report_object(const AnalysisResult& r) {
    json out;
    if (r.model && r.model->address) out["contract"] = address_to_hex(*r.model->address);
    json findings = json::array();
    json unreachable = json::array();
    if (r.detection) {
        const auto& m = *r.model;
        for (const auto& f : r.detection->findings) {
            json vars = json::array();
            json paths = json::array();
            for (const auto& t : f.tainted) {
                vars.push_back(var_name(m, t.var));
                json p = json::array();
                for (auto n : t.path) p.push_back(r.sdg->nodes()[n].name);
                paths.push_back(std::move(p));
            }
            json traces = json::array();
            for (const auto& t : f.traces) traces.push_back({{"functions", t.functions}, {"vars", t.vars}});
            json inds = json::array();
            for (const auto& i : f.indicators) inds.push_back(indicator_json(m, i));
            findings.push_back({{"rule", std::string(rule_name(f.rule))},
                                {"indicator_function", f.function},
                                {"entry_trace", f.entry_trace},
                                {"tainted_state_vars", vars},
                                {"paths", paths},
                                {"traces", traces},
                                {"confidence", f.confidence == Confidence::High ? "high" : "low"},
                                {"witness", {{"indicators", inds}}}});
        }
        for (const auto& i : r.detection->unreachable) unreachable.push_back(indicator_json(m, i));
    }
    json warnings = json::array();
    for (const auto& w : r.lift_warnings)
        warnings.push_back({{"function", w.function}, {"offset", w.offset}, {"reason", w.reason}});
    out["findings"] = std::move(findings);
    out["diagnostics"] = {{"unreachable_indicators", unreachable},
                          {"lift_warnings", warnings},
                          {"notes", r.notes},
                          {"timed_out", r.timed_out}};
    return out;
}

}  // namespace

std::string report_json(const AnalysisResult& r) { return report_object(r).dump(2) + "\n"; }

std::string report_text(const AnalysisResult& r) {
    std::ostringstream os;
    if (r.model && r.model->address) os << "contract " << address_to_hex(*r.model->address) << "\n\n";
    if (r.timed_out) os << "analysis timed out; results are partial\n\n";
    if (!r.detection || r.detection->findings.empty()) os << "no findings\n";
    if (r.detection) {
        for (const auto& f : r.detection->findings) {
            os << "[" << rule_name(f.rule) << "] " << f.function << " (confidence "
               << (f.confidence == Confidence::High ? "high" : "low") << ")\n";
            os << "  entry: ";
            for (std::size_t i = 0; i < f.entry_trace.size(); ++i) os << (i ? " → " : "") << f.entry_trace[i];
            os << "\n";
            for (const auto& t : f.traces) os << "  " << trace_to_text(t) << "\n";
            os << "\n";
        }
        for (const auto& i : r.detection->unreachable)
            os << "unreachable " << rule_name(i.rule) << " indicator in " << i.function << " at "
               << path_to_string(i.site) << "\n";
    }
    for (const auto& w : r.lift_warnings)
        os << "warning: " << w.function << " @0x" << std::hex << w.offset << std::dec << ": " << w.reason << "\n";
    for (const auto& n : r.notes) os << "note: " << n << "\n";
    return os.str();
}

int exit_code_for(const AnalysisResult& r) {
    if (r.timed_out) return 3;
    return r.has_findings() ? 2 : 0;
}

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Fixture {
    std::string name;
    std::filesystem::path input;
    InputKind kind = InputKind::Model;
    std::optional<std::filesystem::path> traces;
};

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<Fixture> scan_fixtures(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw Error(ErrorCode::Io, "not a directory: " + dir.string());
    std::map<std::string, Fixture> found;
    std::set<std::string> traces;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto file = e.path().filename().string();
        if (ends_with(file, ".model.json")) {
            auto name = file.substr(0, file.size() - 11);
            found[name] = {name, e.path(), InputKind::Model, std::nullopt};
        } else if (ends_with(file, ".hex")) {
            auto name = file.substr(0, file.size() - 4);
            found[name] = {name, e.path(), InputKind::Bytecode, std::nullopt};
        } else if (ends_with(file, ".traces.jsonl")) {
            traces.insert(file.substr(0, file.size() - 13));
        }
    }
    std::vector<Fixture> out;
    for (auto& [name, fx] : found) {
        if (traces.count(name)) fx.traces = dir / (name + ".traces.jsonl");
        out.push_back(fx);
    }
    return out;
}

struct Expected {
    std::string rule;
    std::string function;
    std::set<std::string> vars;
    std::optional<std::set<std::string>> traces;
    std::optional<std::vector<std::string>> entry;
};

std::string describe(const std::string& rule, const std::string& fn, const std::set<std::string>& vars) {
    std::string s = rule + " " + fn + " {";
    bool first = true;
    for (const auto& v : vars) {
        s += (first ? "" : ", ") + v;
        first = false;
    }
    return s + "}";
}

std::vector<Expected> parse_expected(const json& j, const std::string& name) {
    std::vector<Expected> out;
    if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "expectation for " + name + " must be an object");
    if (!j.contains("findings")) return out;
    try {
        for (const auto& f : j.at("findings")) {
            Expected e;
            e.rule = f.at("rule").get<std::string>();
            e.function = f.at("indicator_function").get<std::string>();
            for (const auto& v : f.at("tainted_state_vars")) e.vars.insert(v.get<std::string>());
            if (f.contains("traces")) {
                e.traces.emplace();
                for (const auto& t : f.at("traces")) e.traces->insert(t.get<std::string>());
            }
            if (f.contains("entry_trace")) e.entry = f.at("entry_trace").get<std::vector<std::string>>();
            out.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaViolation, "expectation for " + name + ": " + e.what());
    }
    return out;
}

struct Outcome {
    json entry;
    bool pass = false;
    std::size_t tp = 0, fp = 0, fn = 0;
};

Outcome compare(const Fixture& fx, const std::vector<Expected>& expected, const AnalysisResult& r) {
    Outcome o;
    json missing = json::array(), extra = json::array(), mismatched = json::array();
    std::set<std::size_t> used;
    const auto& findings = r.detection ? r.detection->findings : std::vector<Finding>{};
    auto vars_of = [&](const Finding& f) {
        std::set<std::string> vs;
        for (const auto& t : f.tainted) vs.insert(var_name(*r.model, t.var));
        return vs;
    };
    for (const auto& e : expected) {
        std::optional<std::size_t> hit;
        for (std::size_t i = 0; i < findings.size(); ++i)
            if (!used.count(i) && rule_name(findings[i].rule) == e.rule && findings[i].function == e.function) {
                hit = i;
                break;
            }
        if (!hit) {
            missing.push_back(describe(e.rule, e.function, e.vars));
            ++o.fn;
            continue;
        }
        used.insert(*hit);
        const auto& f = findings[*hit];
        std::vector<std::string> problems;
        const auto vars = vars_of(f);
        if (vars != e.vars) problems.push_back("tainted vars " + describe(e.rule, e.function, vars));
        if (e.traces) {
            std::set<std::string> got;
            for (const auto& t : f.traces) got.insert(trace_to_text(t));
            if (got != *e.traces) {
                std::string s = "traces";
                for (const auto& t : got) s += " | " + t;
                problems.push_back(s);
            }
        }
        if (e.entry && *e.entry != f.entry_trace) {
            std::string s = "entry trace";
            for (const auto& t : f.entry_trace) s += " " + t;
            problems.push_back(s);
        }
        if (problems.empty()) {
            ++o.tp;
        } else {
            ++o.fn;
            ++o.fp;
            mismatched.push_back({{"expected", describe(e.rule, e.function, e.vars)}, {"got", problems}});
        }
    }
    for (std::size_t i = 0; i < findings.size(); ++i)
        if (!used.count(i)) {
            extra.push_back(describe(std::string(rule_name(findings[i].rule)), findings[i].function, vars_of(findings[i])));
            ++o.fp;
        }
    o.pass = missing.empty() && extra.empty() && mismatched.empty() && !r.timed_out;
    o.entry = {{"name", fx.name},    {"pass", o.pass},           {"missing", missing},
               {"extra", extra},     {"mismatched", mismatched}, {"report", report_object(r)}};
    return o;
}

}  // namespace

CorpusSummary run_corpus(const std::string& dir, const std::string& expected_json, const CorpusOptions& opts) {
    json expected;
    try {
        expected = json::parse(expected_json);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::MalformedJson, std::string("expectations: ") + e.what());
    }
    const json contracts = expected.is_object() && expected.contains("contracts") ? expected.at("contracts") : json::object();
    if (!contracts.is_object()) throw Error(ErrorCode::SchemaViolation, "expectations: \"contracts\" must be an object");

    const auto fixtures = scan_fixtures(dir);
    std::set<std::string> names;
    for (const auto& fx : fixtures) {
        names.insert(fx.name);
        if (!contracts.contains(fx.name)) throw Error(ErrorCode::MissingExpectation, "no expectation for " + fx.name);
    }
    for (const auto& [name, _] : contracts.items())
        if (!names.count(name)) throw Error(ErrorCode::MissingFixture, "no fixture for expected contract " + name);

    std::vector<std::vector<Expected>> wanted;
    for (const auto& fx : fixtures) wanted.push_back(parse_expected(contracts.at(fx.name), fx.name));

    std::vector<Outcome> outcomes(fixtures.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < fixtures.size();) {
            const auto& fx = fixtures[i];
            try {
                AnalysisConfig cfg;
                cfg.kind = fx.kind;
                cfg.input = read_file(fx.input);
                if (fx.traces) cfg.traces_jsonl = read_file(*fx.traces);
                cfg.timeout = opts.timeout;
                outcomes[i] = compare(fx, wanted[i], run_analysis(cfg));
            } catch (const Error& e) {
                outcomes[i].entry = {{"name", fx.name},
                                     {"pass", false},
                                     {"error", std::string(error_code_name(e.code())) + ": " + e.what()}};
            }
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(fixtures.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    CorpusSummary s;
    json list = json::array();
    std::size_t passed = 0, tp = 0, fp = 0, fn = 0;
    for (auto& o : outcomes) {
        passed += o.pass;
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        s.all_passed = s.all_passed && o.pass;
        list.push_back(std::move(o.entry));
    }
    s.json = json{{"contracts", list},
                  {"passed", passed},
                  {"failed", outcomes.size() - passed},
                  {"confusion", {{"true_positive", tp}, {"false_positive", fp}, {"false_negative", fn}}}}
                 .dump(2) +
             "\n";
    return s;
}

}  // namespace srvscan
