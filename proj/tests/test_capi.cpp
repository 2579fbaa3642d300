// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

// Links only the shared library; everything goes through srvscan.h.

#include <doctest.h>
#include "srvscan/srvscan.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace {

namespace testing {

std::string source_path(const std::string& rel) { return std::string(SRVSCAN_SOURCE_DIR) + "/" + rel; }

std::string read_file(const std::string& rel) {
    std::ifstream in(source_path(rel), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace testing

struct Owned {
    char* p = nullptr;
    ~Owned() { srv_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

using Config = std::unique_ptr<srv_config, decltype(&srv_config_free)>;
using Result = std::unique_ptr<srv_result, decltype(&srv_result_free)>;

Config config() { return {srv_config_new(), &srv_config_free}; }

Result analyze(const srv_config* cfg, srv_status expect = SRV_OK) {
    srv_result* r = nullptr;
    CHECK(srv_analyze(cfg, &r) == expect);
    return {r, &srv_result_free};
}

}  // namespace

TEST_CASE("version and status names") {
    CHECK(std::strlen(srv_version()) > 0);
    CHECK(std::string(srv_status_name(SRV_OK)) == "OK");
    CHECK(std::string(srv_status_name(SRV_ERR_TRUNCATED_PUSH)) != std::string(srv_status_name(SRV_ERR_IO)));
}

TEST_CASE("analyze a model with traces") {
    const auto model = testing::read_file("corpus/TokenGame.model.json");
    const auto traces = testing::read_file("corpus/TokenGame.traces.jsonl");
    auto cfg = config();
    REQUIRE(srv_config_set_model_json(cfg.get(), model.data(), model.size()) == SRV_OK);
    REQUIRE(srv_config_set_traces_jsonl(cfg.get(), traces.data(), traces.size()) == SRV_OK);
    auto r = analyze(cfg.get());
    REQUIRE(r);
    CHECK(srv_result_finding_count(r.get()) == 1);
    CHECK(srv_result_exit_code(r.get()) == 2);
    CHECK_FALSE(srv_result_timed_out(r.get()));

    Owned json, text, fsm, sdg;
    CHECK(srv_result_report(r.get(), SRV_FORMAT_JSON, &json.p) == SRV_OK);
    CHECK(json.str().find("\"Earning\"") != std::string::npos);
    CHECK(srv_result_report(r.get(), SRV_FORMAT_TEXT, &text.p) == SRV_OK);
    CHECK(text.str().find("MintToken → PlaytoEarn → {Earning}") != std::string::npos);
    CHECK(srv_result_dump(r.get(), SRV_DUMP_FSM, &fsm.p) == SRV_OK);
    CHECK(fsm.str().find("digraph") != std::string::npos);
    CHECK(srv_result_dump(r.get(), SRV_DUMP_SDG_JSON, &sdg.p) == SRV_OK);

    Owned disasm;
    CHECK(srv_result_dump(r.get(), SRV_DUMP_DISASM, &disasm.p) != SRV_OK);
    CHECK(disasm.p == nullptr);
    CHECK(std::strlen(srv_last_error()) > 0);
}

TEST_CASE("disabling TSD drops the temporal trace") {
    const auto model = testing::read_file("corpus/TokenGame.model.json");
    const auto traces = testing::read_file("corpus/TokenGame.traces.jsonl");
    auto cfg = config();
    srv_config_set_model_json(cfg.get(), model.data(), model.size());
    srv_config_set_traces_jsonl(cfg.get(), traces.data(), traces.size());
    CHECK(srv_config_set_use_tsd(cfg.get(), 0) == SRV_OK);
    auto r = analyze(cfg.get());
    Owned json;
    REQUIRE(srv_result_report(r.get(), SRV_FORMAT_JSON, &json.p) == SRV_OK);
    CHECK(json.str().find("\"Earning\"") == std::string::npos);
}

TEST_CASE("bytecode input") {
    const auto hex = testing::read_file("corpus/LottoCompiled.hex");
    auto cfg = config();
    REQUIRE(srv_config_set_bytecode(cfg.get(), hex.data(), hex.size()) == SRV_OK);
    auto r = analyze(cfg.get());
    REQUIRE(r);
    CHECK(srv_result_exit_code(r.get()) == 0);
    Owned listing, cfgdot;
    CHECK(srv_result_dump(r.get(), SRV_DUMP_DISASM, &listing.p) == SRV_OK);
    CHECK(listing.str().rfind("0x0000: PUSH1 0x80\n", 0) == 0);
    CHECK(srv_result_dump(r.get(), SRV_DUMP_CFG, &cfgdot.p) == SRV_OK);
}

TEST_CASE("errors") {
    auto cfg = config();
    srv_result* r = nullptr;
    CHECK(srv_analyze(cfg.get(), &r) == SRV_ERR_INVALID_ARGUMENT);
    CHECK(r == nullptr);
    CHECK(srv_analyze(nullptr, &r) == SRV_ERR_INVALID_ARGUMENT);
    CHECK(srv_config_set_fsm_k(nullptr, 2) == SRV_ERR_INVALID_ARGUMENT);

    const std::string bad = "{";
    srv_config_set_model_json(cfg.get(), bad.data(), bad.size());
    CHECK(srv_analyze(cfg.get(), &r) == SRV_ERR_MALFORMED_JSON);

    Owned out;
    CHECK(srv_disassemble("0x61", 4, &out.p) == SRV_ERR_TRUNCATED_PUSH);
    CHECK(std::string(srv_last_error()).find("truncated PUSH") != std::string::npos);
    CHECK(srv_disassemble("0x6001", 6, &out.p) == SRV_OK);
    CHECK(out.str() == "0x0000: PUSH1 0x01\n");

    const std::string trace = "not json\n";
    const auto model = testing::read_file("corpus/Lotto.model.json");
    auto cfg2 = config();
    srv_config_set_model_json(cfg2.get(), model.data(), model.size());
    srv_config_set_traces_jsonl(cfg2.get(), trace.data(), trace.size());
    CHECK(srv_analyze(cfg2.get(), &r) == SRV_ERR_MALFORMED_LINE);
}

TEST_CASE("sdg dot") {
    const auto model = testing::read_file("corpus/Lotto.model.json");
    Owned dot;
    CHECK(srv_sdg_dot(model.data(), model.size(), &dot.p) == SRV_OK);
    CHECK(dot.str().find("var:playerPool") != std::string::npos);
}

TEST_CASE("corpus run") {
    const auto expected = testing::read_file("corpus/expected.json");
    Owned summary;
    int passed = 0;
    CHECK(srv_run_corpus(testing::source_path("corpus").c_str(), expected.data(), expected.size(), 2, 60000,
                         &summary.p, &passed) == SRV_OK);
    CHECK(passed == 1);
    Owned again;
    int passed2 = 0;
    srv_run_corpus(testing::source_path("corpus").c_str(), expected.data(), expected.size(), 1, 60000, &again.p,
                   &passed2);
    CHECK(again.str() == summary.str());
}
