// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#include "srvscan/fsm.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <deque>
#include <set>
#include <sstream>
#include <tuple>

namespace srvscan {

namespace {

[[noreturn]] void bad_line(std::size_t line, const std::string& why) {
    throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line) + ": " + why);
}

std::string normalize_sender(const std::string& s, std::size_t line) {
    if (s.size() != 42 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X')) bad_line(line, "sender is not a 20-byte address");
    std::string out = "0x";
    for (std::size_t i = 2; i < s.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(s[i]);
        if (!std::isxdigit(c)) bad_line(line, "sender is not a 20-byte address");
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

std::uint64_t non_negative(const nlohmann::json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end()) bad_line(line, std::string("missing ") + key);
    if (!it->is_number_integer()) bad_line(line, std::string(key) + " must be an integer");
    if (it->is_number_unsigned()) return it->get<std::uint64_t>();
    const auto v = it->get<std::int64_t>();
    if (v < 0) bad_line(line, std::string(key) + " must be non-negative");
    return static_cast<std::uint64_t>(v);
}

}  // namespace

std::vector<TxRecord> parse_trace_records(std::string_view jsonl) {
    std::vector<TxRecord> out;
    std::set<std::tuple<std::string, std::uint64_t, std::uint64_t>> keys;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= jsonl.size()) {
        const std::size_t nl = jsonl.find('\n', pos);
        const std::size_t end = nl == std::string_view::npos ? jsonl.size() : nl;
        std::string_view line = jsonl.substr(pos, end - pos);
        ++line_no;
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            if (nl == std::string_view::npos) break;
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            bad_line(line_no, "not valid JSON");
        }
        if (!j.is_object()) bad_line(line_no, "record must be an object");
        TxRecord r;
        auto s = j.find("sender");
        if (s == j.end() || !s->is_string()) bad_line(line_no, "missing sender");
        r.sender = normalize_sender(s->get<std::string>(), line_no);
        auto f = j.find("function");
        if (f == j.end() || !f->is_string() || f->get<std::string>().empty()) bad_line(line_no, "missing function");
        r.function = f->get<std::string>();
        r.block = non_negative(j, "block", line_no);
        r.index = non_negative(j, "index", line_no);
        if (auto t = j.find("timestamp"); t != j.end() && !t->is_null()) {
            if (!t->is_number_integer()) bad_line(line_no, "timestamp must be an integer");
            r.timestamp = t->get<std::int64_t>();
        }
        if (!keys.insert({r.sender, r.block, r.index}).second)
            throw Error(ErrorCode::DuplicateOrderKey, "duplicate (sender, block, index): (" + r.sender + ", " +
                                                          std::to_string(r.block) + ", " + std::to_string(r.index) + ")");
        out.push_back(std::move(r));
        if (nl == std::string_view::npos) break;
    }
    return out;
}

std::vector<TransactionTrace> group_traces(std::vector<TxRecord> records) {
    std::stable_sort(records.begin(), records.end(), [](const TxRecord& a, const TxRecord& b) {
        return std::tie(a.sender, a.block, a.index) < std::tie(b.sender, b.block, b.index);
    });
    std::vector<TransactionTrace> out;
    for (auto& r : records) {
        if (out.empty() || out.back().sender != r.sender) out.push_back({r.sender, {}});
        out.back().calls.push_back(std::move(r.function));
    }
    return out;
}

std::optional<FsmState> Fsm::next(FsmState s, std::string_view label) const {
    for (const auto& t : transitions)
        if (t.from == s && t.label == label) return t.to;
    return std::nullopt;
}

bool Fsm::accepts(const std::vector<std::string>& calls) const {
    FsmState s = initial;
    for (const auto& c : calls) {
        auto n = next(s, c);
        if (!n) return false;
        s = *n;
    }
    return true;
}

std::uint64_t Fsm::label_support(std::string_view label) const {
    std::uint64_t total = 0;
    for (const auto& t : transitions)
        if (t.label == label) total += t.support;
    return total;
}

Fsm build_initial_fsm(const std::vector<TransactionTrace>& traces) {
    if (traces.empty()) throw Error(ErrorCode::EmptyInput, "no transaction traces");
    std::vector<std::map<std::string, std::pair<FsmState, std::uint64_t>>> out(1);
    std::set<std::string> labels;
    for (const auto& tr : traces) {
        FsmState s = 0;
        for (const auto& c : tr.calls) {
            labels.insert(c);
            auto it = out[s].find(c);
            if (it == out[s].end()) {
                const auto id = static_cast<FsmState>(out.size());
                it = out[s].emplace(c, std::make_pair(id, std::uint64_t{0})).first;
                out.emplace_back();
            }
            ++it->second.second;
            s = it->second.first;
        }
    }
    Fsm fsm;
    for (FsmState s = 0; s < out.size(); ++s) {
        fsm.states.push_back(s);
        fsm.members[s] = {s};
        for (const auto& [label, ts] : out[s]) fsm.transitions.push_back({s, label, ts.first, ts.second});
    }
    fsm.labels.assign(labels.begin(), labels.end());
    return fsm;
}

std::map<FsmState, std::vector<std::vector<std::string>>> k_tails(const Fsm& fsm, unsigned k) {
    std::map<FsmState, std::vector<const FsmTransition*>> out;
    for (const auto& t : fsm.transitions) out[t.from].push_back(&t);

    std::map<FsmState, std::vector<std::vector<std::string>>> result;
    for (FsmState s : fsm.states) {
        std::set<std::vector<std::string>> tails;
        std::vector<std::string> prefix;
        auto rec = [&](auto&& self, FsmState at) -> void {
            auto it = out.find(at);
            if (prefix.size() == k || it == out.end()) {
                tails.insert(prefix);
                return;
            }
            for (const auto* t : it->second) {
                prefix.push_back(t->label);
                self(self, t->to);
                prefix.pop_back();
            }
        };
        rec(rec, s);
        result[s].assign(tails.begin(), tails.end());
    }
    return result;
}

namespace {

/// Union-find over the states of one Fsm, folding successors on every union.
class Folder {
public:
    explicit Folder(const Fsm& fsm) : fsm_(fsm) {
        for (std::size_t i = 0; i < fsm.states.size(); ++i) index_[fsm.states[i]] = i;
        parent_.resize(fsm.states.size());
        out_.resize(fsm.states.size());
        for (std::size_t i = 0; i < parent_.size(); ++i) parent_[i] = i;
        for (const auto& t : fsm.transitions) out_[index_.at(t.from)][t.label] = {index_.at(t.to), t.support};
    }

    void merge(FsmState a, FsmState b) {
        std::deque<std::pair<std::size_t, std::size_t>> pending{{index_.at(a), index_.at(b)}};
        while (!pending.empty()) {
            auto [x, y] = pending.front();
            pending.pop_front();
            x = find(x);
            y = find(y);
            if (x == y) continue;
            const std::size_t keep = std::min(x, y);
            const std::size_t drop = std::max(x, y);
            parent_[drop] = keep;
            for (auto& [label, ts] : out_[drop]) {
                auto it = out_[keep].find(label);
                if (it == out_[keep].end()) {
                    out_[keep].emplace(label, ts);
                } else {
                    it->second.second += ts.second;
                    pending.emplace_back(it->second.first, ts.first);
                }
            }
            out_[drop].clear();
        }
    }

    Fsm result() {
        Fsm r;
        r.labels = fsm_.labels;
        r.initial = fsm_.states[find(index_.at(fsm_.initial))];
        std::map<std::size_t, std::set<FsmState>> members;
        for (std::size_t i = 0; i < parent_.size(); ++i) {
            auto& m = members[find(i)];
            auto it = fsm_.members.find(fsm_.states[i]);
            if (it == fsm_.members.end()) m.insert(fsm_.states[i]);
            else m.insert(it->second.begin(), it->second.end());
        }
        // Keep only what the initial state reaches; folding never disconnects a state.
        std::set<std::size_t> seen{find(index_.at(fsm_.initial))};
        std::deque<std::size_t> work(seen.begin(), seen.end());
        while (!work.empty()) {
            const auto s = work.front();
            work.pop_front();
            for (const auto& [label, ts] : out_[s]) {
                const auto t = find(ts.first);
                if (seen.insert(t).second) work.push_back(t);
            }
        }
        for (std::size_t s : seen) {
            const FsmState id = fsm_.states[s];
            r.states.push_back(id);
            r.members[id].assign(members[s].begin(), members[s].end());
            for (const auto& [label, ts] : out_[s])
                r.transitions.push_back({id, label, fsm_.states[find(ts.first)], ts.second});
        }
        return r;
    }

private:
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }

    const Fsm& fsm_;
    std::map<FsmState, std::size_t> index_;
    std::vector<std::size_t> parent_;
    std::vector<std::map<std::string, std::pair<std::size_t, std::uint64_t>>> out_;
};

bool merge_equivalent(Fsm& fsm, unsigned k) {
    std::map<std::vector<std::vector<std::string>>, std::vector<FsmState>> groups;
    for (auto& [s, tails] : k_tails(fsm, k)) groups[tails].push_back(s);
    Folder folder(fsm);
    bool changed = false;
    for (const auto& [tails, members] : groups)
        for (std::size_t i = 1; i < members.size(); ++i) {
            folder.merge(members[0], members[i]);
            changed = true;
        }
    if (changed) fsm = folder.result();
    return changed;
}

bool merge_subsumed(Fsm& fsm, const Deadline& deadline) {
    std::map<FsmState, std::set<std::string>> outs;
    for (FsmState s : fsm.states) outs[s];
    for (const auto& t : fsm.transitions) outs[t.from].insert(t.label);
    for (const auto& [b, bl] : outs) {
        if (bl.empty()) continue;
        deadline.check();
        for (const auto& [a, al] : outs) {
            if (a == b || al.size() < bl.size()) continue;
            if (!std::includes(al.begin(), al.end(), bl.begin(), bl.end())) continue;
            Folder folder(fsm);
            folder.merge(a, b);
            fsm = folder.result();
            return true;
        }
    }
    return false;
}

}  // namespace

Fsm merge_states(const Fsm& fsm, unsigned k, const Deadline& deadline) {
    Fsm cur = fsm;
    for (;;) {
        deadline.check();
        if (merge_equivalent(cur, k)) continue;
        if (merge_subsumed(cur, deadline)) continue;
        return cur;
    }
}

std::vector<TsdEdge> extract_tsd(const Fsm& fsm, std::uint64_t min_support) {
    std::map<FsmState, std::vector<const FsmTransition*>> out;
    for (const auto& t : fsm.transitions) out[t.from].push_back(&t);

    std::vector<TsdEdge> edges;
    for (const auto& pre : fsm.labels) {
        // Labels that can fire before any `pre` transition.
        std::set<std::string> free_labels;
        std::set<FsmState> seen{fsm.initial};
        std::deque<FsmState> work{fsm.initial};
        while (!work.empty()) {
            const auto s = work.front();
            work.pop_front();
            for (const auto* t : out[s]) {
                if (t->label == pre) continue;
                free_labels.insert(t->label);
                if (seen.insert(t->to).second) work.push_back(t->to);
            }
        }
        for (const auto& dep : fsm.labels) {
            if (dep == pre || free_labels.count(dep)) continue;
            const auto support = fsm.label_support(dep);
            if (support == 0 || support < min_support) continue;
            edges.push_back({dep, pre});
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

std::string fsm_to_dot(const Fsm& fsm) {
    std::ostringstream os;
    os << "digraph fsm {\n  rankdir=LR;\n  node [shape=circle];\n";
    os << "  s" << fsm.initial << " [shape=doublecircle];\n";
    for (FsmState s : fsm.states) os << "  s" << s << ";\n";
    for (const auto& t : fsm.transitions)
        os << "  s" << t.from << " -> s" << t.to << " [label=\"" << t.label << " (" << t.support << ")\"];\n";
    os << "}\n";
    return os.str();
}

std::string fsm_to_json(const Fsm& fsm) {
    nlohmann::json j;
    j["initial"] = fsm.initial;
    j["states"] = fsm.states;
    j["labels"] = fsm.labels;
    auto& ts = j["transitions"] = nlohmann::json::array();
    for (const auto& t : fsm.transitions)
        ts.push_back({{"from", t.from}, {"label", t.label}, {"to", t.to}, {"support", t.support}});
    auto& ms = j["members"] = nlohmann::json::object();
    for (const auto& [s, m] : fsm.members) ms[std::to_string(s)] = m;
    return j.dump() + "\n";
}

std::string tsd_to_json(const std::vector<TsdEdge>& edges) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : edges) arr.push_back({{"dependent", e.dependent}, {"prerequisite", e.prerequisite}});
    return arr.dump() + "\n";
}

}  // namespace srvscan
