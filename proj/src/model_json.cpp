// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#include "srvscan/error.hpp"
#include "srvscan/model.hpp"

#include <nlohmann/json.hpp>

#include <initializer_list>

namespace srvscan {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::SchemaViolation, "schema violation at " + (where.empty() ? "/" : where) + ": " + what);
}

// Reads one JSON value while tracking its JSON pointer.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    const json& raw() const { return j_; }
    const std::string& path() const { return path_; }

    Reader at(const std::string& key) const {
        expect_object();
        auto it = j_.find(key);
        if (it == j_.end()) schema_error(path_, "missing required field '" + key + "'");
        return Reader(*it, path_ + "/" + key);
    }

    std::optional<Reader> maybe(const std::string& key) const {
        expect_object();
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return std::nullopt;
        return Reader(*it, path_ + "/" + key);
    }

    bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

    void only_keys(std::initializer_list<std::string_view> allowed) const {
        expect_object();
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool ok = false;
            for (auto a : allowed) ok = ok || a == it.key();
            if (!ok) schema_error(path_ + "/" + it.key(), "unexpected field");
        }
    }

    std::vector<Reader> items() const {
        if (!j_.is_array()) schema_error(path_, "expected array");
        std::vector<Reader> out;
        for (std::size_t i = 0; i < j_.size(); ++i) out.emplace_back(j_[i], path_ + "/" + std::to_string(i));
        return out;
    }

    std::string str() const {
        if (!j_.is_string()) schema_error(path_, "expected string");
        return j_.get<std::string>();
    }

    std::uint32_t u32() const {
        if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<std::int64_t>() >= 0))
            schema_error(path_, "expected non-negative integer");
        auto v = j_.get<std::uint64_t>();
        if (v > 0xffffffffu) schema_error(path_, "integer out of range");
        return static_cast<std::uint32_t>(v);
    }

    bool boolean() const {
        if (!j_.is_boolean()) schema_error(path_, "expected boolean");
        return j_.get<bool>();
    }

    U256 u256() const {
        auto v = parse_u256_hex(str());
        if (!v) schema_error(path_, "expected 0x-prefixed 256-bit hex");
        return *v;
    }

    void expect_object() const {
        if (!j_.is_object()) schema_error(path_, "expected object");
    }

    [[noreturn]] void fail(const std::string& what) const { schema_error(path_, what); }

private:
    const json& j_;
    std::string path_;
};

VarKind parse_kind(const Reader& r) {
    auto s = r.str();
    if (s == "scalar") return VarKind::Scalar;
    if (s == "mapping-base") return VarKind::MappingBase;
    r.fail("expected \"scalar\" or \"mapping-base\"");
}

std::string_view kind_name(VarKind k) { return k == VarKind::Scalar ? "scalar" : "mapping-base"; }

VarKey parse_var_ref(const Reader& r) { return {r.at("slot").u256(), parse_kind(r.at("kind"))}; }

Expr parse_expr(const Reader& r);

std::vector<Expr> parse_args(const Reader& r) {
    std::vector<Expr> out;
    for (const auto& item : r.at("args").items()) out.push_back(parse_expr(item));
    return out;
}

Expr parse_expr(const Reader& r) {
    r.expect_object();
    if (r.has("atom")) {
        auto atom = r.at("atom").str();
        if (atom == "var") {
            r.only_keys({"atom", "slot", "kind"});
            return Expr::var(parse_var_ref(r));
        }
        if (atom == "env") {
            r.only_keys({"atom", "name"});
            auto name = r.at("name");
            auto a = env_atom_from_name(name.str());
            if (!a) name.fail("unknown environment atom");
            return Expr::env(*a);
        }
        if (atom == "param") {
            r.only_keys({"atom", "index"});
            return Expr::param(r.at("index").u32());
        }
        if (atom == "const") {
            r.only_keys({"atom", "value"});
            return Expr::constant(r.at("value").u256());
        }
        if (atom == "callresult") {
            r.only_keys({"atom"});
            return Expr::call_result();
        }
        if (atom == "opaque") {
            r.only_keys({"atom"});
            return Expr::opaque();
        }
        r.at("atom").fail("unknown atom kind");
    }
    if (r.has("cmp")) {
        r.only_keys({"cmp", "args"});
        auto op = r.at("cmp").str();
        for (int i = 0; i <= static_cast<int>(CmpOp::Ge); ++i)
            if (cmp_op_name(static_cast<CmpOp>(i)) == op) return {Compare{static_cast<CmpOp>(i), parse_args(r)}};
        r.at("cmp").fail("unknown comparison");
    }
    if (r.has("bool")) {
        r.only_keys({"bool", "args"});
        auto op = r.at("bool").str();
        for (int i = 0; i <= static_cast<int>(BoolOp::Not); ++i)
            if (bool_op_name(static_cast<BoolOp>(i)) == op) return Expr::logic(static_cast<BoolOp>(i), parse_args(r));
        r.at("bool").fail("unknown boolean operator");
    }
    if (r.has("arith")) {
        r.only_keys({"arith", "args"});
        auto op = r.at("arith").str();
        for (int i = 0; i <= static_cast<int>(ArithOp::Mod); ++i)
            if (arith_op_name(static_cast<ArithOp>(i)) == op) return Expr::arith(static_cast<ArithOp>(i), parse_args(r));
        r.at("arith").fail("unknown arithmetic operator");
    }
    r.fail("expression must carry one of atom/cmp/bool/arith");
}

std::vector<Statement> parse_body(const Reader& r);

Statement parse_statement(const Reader& r) {
    auto op = r.at("op").str();
    if (op == "read") {
        r.only_keys({"op", "var"});
        return {ReadStmt{parse_var_ref(r.at("var"))}};
    }
    if (op == "write") {
        r.only_keys({"op", "var", "value"});
        return {WriteStmt{parse_var_ref(r.at("var")), parse_expr(r.at("value"))}};
    }
    if (op == "assert") {
        r.only_keys({"op", "cond"});
        return {AssertStmt{parse_expr(r.at("cond"))}};
    }
    if (op == "extcall") {
        r.only_keys({"op", "kind", "target", "result_used"});
        auto kr = r.at("kind");
        auto kind = call_kind_from_name(kr.str());
        if (!kind) kr.fail("unknown call kind");
        return {ExternalCallStmt{*kind, parse_expr(r.at("target")), r.at("result_used").boolean()}};
    }
    if (op == "icall") {
        r.only_keys({"op", "callee", "args"});
        return {InternalCallStmt{r.at("callee").str(), parse_args(r)}};
    }
    if (op == "loop") {
        r.only_keys({"op", "body", "bound"});
        LoopStmt loop;
        loop.body = parse_body(r.at("body"));
        if (auto b = r.maybe("bound")) loop.bound = parse_expr(*b);
        return {std::move(loop)};
    }
    if (op == "return") {
        r.only_keys({"op"});
        return {ReturnStmt{}};
    }
    r.at("op").fail("unknown statement op '" + op + "'");
}

std::vector<Statement> parse_body(const Reader& r) {
    std::vector<Statement> out;
    for (const auto& item : r.items()) out.push_back(parse_statement(item));
    return out;
}

Visibility parse_visibility(const Reader& r) {
    auto s = r.str();
    for (int i = 0; i <= static_cast<int>(Visibility::Private); ++i)
        if (visibility_name(static_cast<Visibility>(i)) == s) return static_cast<Visibility>(i);
    r.fail("expected public/external/internal/private");
}

FunctionDef parse_function(const Reader& r) {
    r.only_keys({"name", "selector", "visibility", "param_count", "body"});
    FunctionDef f;
    f.name = r.at("name").str();
    if (f.name.empty()) r.at("name").fail("function name must be non-empty");
    if (!r.has("selector")) r.fail("missing required field 'selector'");
    if (auto sel = r.maybe("selector")) {
        auto s = sel->str();
        if (s.size() != 10 || s[0] != '0' || s[1] != 'x') sel->fail("selector must be 0x followed by 8 hex digits");
        auto v = parse_u256_hex(s);
        if (!v) sel->fail("selector must be 0x followed by 8 hex digits");
        f.selector = static_cast<std::uint32_t>(low_u64(*v));
    }
    f.visibility = parse_visibility(r.at("visibility"));
    f.param_count = r.at("param_count").u32();
    f.body = parse_body(r.at("body"));
    return f;
}

json var_ref_json(const VarKey& k) { return {{"slot", to_hex(k.slot)}, {"kind", kind_name(k.kind)}}; }

json expr_json(const Expr& e);

json args_json(const std::vector<Expr>& args) {
    json out = json::array();
    for (const auto& a : args) out.push_back(expr_json(a));
    return out;
}

json expr_json(const Expr& e) {
    return std::visit(Overloaded{
                          [](const StateRead& r) {
                              return json{{"atom", "var"}, {"slot", to_hex(r.var.slot)}, {"kind", kind_name(r.var.kind)}};
                          },
                          [](const EnvRead& r) { return json{{"atom", "env"}, {"name", env_atom_name(r.atom)}}; },
                          [](const ParamRef& p) { return json{{"atom", "param"}, {"index", p.index}}; },
                          [](const Constant& c) { return json{{"atom", "const"}, {"value", to_hex(c.value)}}; },
                          [](const CallResult&) { return json{{"atom", "callresult"}}; },
                          [](const Opaque&) { return json{{"atom", "opaque"}}; },
                          [](const Compare& c) { return json{{"cmp", cmp_op_name(c.op)}, {"args", args_json(c.args)}}; },
                          [](const Logic& c) { return json{{"bool", bool_op_name(c.op)}, {"args", args_json(c.args)}}; },
                          [](const Arith& c) { return json{{"arith", arith_op_name(c.op)}, {"args", args_json(c.args)}}; },
                      },
                      e.node);
}

json body_json(const std::vector<Statement>& body);

json statement_json(const Statement& s) {
    return std::visit(Overloaded{
                          [](const ReadStmt& r) { return json{{"op", "read"}, {"var", var_ref_json(r.var)}}; },
                          [](const WriteStmt& w) {
                              return json{{"op", "write"}, {"var", var_ref_json(w.var)}, {"value", expr_json(w.value)}};
                          },
                          [](const AssertStmt& a) { return json{{"op", "assert"}, {"cond", expr_json(a.cond)}}; },
                          [](const ExternalCallStmt& c) {
                              return json{{"op", "extcall"},
                                          {"kind", call_kind_name(c.kind)},
                                          {"target", expr_json(c.target)},
                                          {"result_used", c.result_used}};
                          },
                          [](const InternalCallStmt& c) {
                              return json{{"op", "icall"}, {"callee", c.callee}, {"args", args_json(c.args)}};
                          },
                          [](const LoopStmt& l) {
                              return json{{"op", "loop"},
                                          {"body", body_json(l.body)},
                                          {"bound", l.bound ? expr_json(*l.bound) : json(nullptr)}};
                          },
                          [](const ReturnStmt&) { return json{{"op", "return"}}; },
                      },
                      s.node);
}

json body_json(const std::vector<Statement>& body) {
    json out = json::array();
    for (const auto& s : body) out.push_back(statement_json(s));
    return out;
}

}  // namespace

ContractModel load_model(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::MalformedJson, std::string("malformed JSON: ") + e.what());
    }
    Reader root(doc, "");
    root.only_keys({"address", "functions", "state_vars"});

    ContractModel m;
    m.provenance = Provenance::LoadedFromJson;
    if (auto a = root.maybe("address")) {
        auto addr = parse_address(a->str());
        if (!addr) a->fail("expected 0x-prefixed 20-byte address");
        m.address = *addr;
    }
    for (const auto& v : root.at("state_vars").items()) {
        v.only_keys({"slot", "kind", "name"});
        StateVarId sv{v.at("slot").u256(), parse_kind(v.at("kind")), std::nullopt};
        if (auto n = v.maybe("name")) sv.name = n->str();
        m.state_vars.push_back(std::move(sv));
    }
    for (const auto& f : root.at("functions").items()) m.functions.push_back(parse_function(f));

    auto violations = validate_model(m);
    if (!violations.empty()) {
        const auto& v = violations.front();
        std::string msg = "schema violation at " + v.location + ": " + std::string(violation_code_name(v.code)) +
                          "(\"" + v.detail + "\")";
        if (violations.size() > 1) msg += " and " + std::to_string(violations.size() - 1) + " more";
        throw Error(ErrorCode::SchemaViolation, msg);
    }
    return m;
}

std::string save_model(const ContractModel& m) {
    json doc = json::object();
    if (m.address) doc["address"] = address_to_hex(*m.address);
    json vars = json::array();
    for (const auto& v : m.state_vars) {
        json jv{{"slot", to_hex(v.slot)}, {"kind", kind_name(v.kind)}};
        if (v.name) jv["name"] = *v.name;
        vars.push_back(std::move(jv));
    }
    json fns = json::array();
    for (const auto& f : m.functions) {
        fns.push_back(json{{"name", f.name},
                           {"selector", f.selector ? json(selector_to_hex(*f.selector)) : json(nullptr)},
                           {"visibility", visibility_name(f.visibility)},
                           {"param_count", f.param_count},
                           {"body", body_json(f.body)}});
    }
    doc["functions"] = std::move(fns);
    doc["state_vars"] = std::move(vars);
    return doc.dump();
}

}  // namespace srvscan
