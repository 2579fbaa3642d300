/* srvscan: state-reverting vulnerability scanner for EVM contracts
 * Copyright 2026 The srvscan Authors.
 * Licensed under the Apache License, Version 2.0.
 *
 * Stable C interface. Strings returned through `char**` are owned by the
 * caller and released with srv_string_free. On failure every call leaves a
 * message retrievable with srv_last_error (per thread).
 */

#ifndef SRVSCAN_H
#define SRVSCAN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define SRV_API __attribute__((visibility("default")))
#else
#define SRV_API
#endif

typedef enum srv_status {
    SRV_OK = 0,
    SRV_ERR_IO,
    SRV_ERR_MALFORMED_JSON,
    SRV_ERR_SCHEMA_VIOLATION,
    SRV_ERR_TRUNCATED_PUSH,
    SRV_ERR_MALFORMED_LINE,
    SRV_ERR_DUPLICATE_ORDER_KEY,
    SRV_ERR_EMPTY_INPUT,
    SRV_ERR_INCONSISTENT_INPUTS,
    SRV_ERR_UNKNOWN_NODE,
    SRV_ERR_UNKNOWN_VAR,
    SRV_ERR_UNKNOWN_FUNCTION,
    SRV_ERR_MISSING_EXPECTATION,
    SRV_ERR_MISSING_FIXTURE,
    SRV_ERR_TIMEOUT,
    SRV_ERR_INVALID_ARGUMENT,
    SRV_ERR_INTERNAL
} srv_status;

typedef enum srv_format { SRV_FORMAT_JSON = 0, SRV_FORMAT_TEXT = 1 } srv_format;

typedef enum srv_dump {
    SRV_DUMP_DISASM = 0, /* listing, bytecode input only */
    SRV_DUMP_CFG,        /* DOT, bytecode input only */
    SRV_DUMP_MODEL,      /* canonical model JSON */
    SRV_DUMP_ASD,        /* JSON */
    SRV_DUMP_FSM,        /* DOT, needs traces */
    SRV_DUMP_TSD,        /* JSON */
    SRV_DUMP_SDG_DOT,
    SRV_DUMP_SDG_JSON
} srv_dump;

typedef struct srv_config srv_config;
typedef struct srv_result srv_result;

SRV_API const char* srv_version(void);
SRV_API const char* srv_status_name(srv_status s);
SRV_API const char* srv_last_error(void);
SRV_API void srv_string_free(char* s);

SRV_API srv_config* srv_config_new(void);
SRV_API void srv_config_free(srv_config* cfg);
/* Exactly one input: bytecode (hex text or raw bytes) or model JSON. */
SRV_API srv_status srv_config_set_bytecode(srv_config* cfg, const char* data, size_t len);
SRV_API srv_status srv_config_set_model_json(srv_config* cfg, const char* json, size_t len);
SRV_API srv_status srv_config_set_traces_jsonl(srv_config* cfg, const char* jsonl, size_t len);
SRV_API srv_status srv_config_set_fsm_k(srv_config* cfg, uint32_t k);
SRV_API srv_status srv_config_set_min_support(srv_config* cfg, uint64_t n);
SRV_API srv_status srv_config_set_timeout_ms(srv_config* cfg, uint64_t ms);
SRV_API srv_status srv_config_set_use_tsd(srv_config* cfg, int enabled);

/* SRV_OK or SRV_ERR_TIMEOUT both yield a result; a timed-out result is partial. */
SRV_API srv_status srv_analyze(const srv_config* cfg, srv_result** out);
SRV_API void srv_result_free(srv_result* r);
SRV_API size_t srv_result_finding_count(const srv_result* r);
SRV_API int srv_result_timed_out(const srv_result* r);
/* 0 clean, 2 findings, 3 timeout. */
SRV_API int srv_result_exit_code(const srv_result* r);
SRV_API srv_status srv_result_report(const srv_result* r, srv_format fmt, char** out);
SRV_API srv_status srv_result_dump(const srv_result* r, srv_dump kind, char** out);

SRV_API srv_status srv_disassemble(const char* data, size_t len, char** out);
SRV_API srv_status srv_sdg_dot(const char* model_json, size_t len, char** out);

/* Summary JSON in *summary; *all_passed is 1 when every fixture matched. */
SRV_API srv_status srv_run_corpus(const char* dir, const char* expected_json, size_t len, uint32_t jobs,
                                  uint64_t timeout_ms, char** summary, int* all_passed);

#ifdef __cplusplus
}
#endif

#endif /* SRVSCAN_H */
