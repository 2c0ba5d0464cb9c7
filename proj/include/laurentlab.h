/* C interface to the truncated iterated Laurent series engine.
 *
 * All functions are thread-compatible (one session per thread). Strings
 * returned through out-parameters are heap-allocated and must be released
 * with ll_string_free.
 */
#ifndef LAURENTLAB_H
#define LAURENTLAB_H

#ifdef __cplusplus
extern "C" {
#endif

/* Opaque interpreter session: ring/vars declarations and let-bindings
 * persist across ll_exec calls. */
typedef struct ll_session ll_session;

/* Status codes, aligned with the CLI exit codes. */
#define LL_OK 0           /* executed, all checks passed */
#define LL_CHECK_FAILED 1 /* a check/verify failed or a domain error */
#define LL_BAD_INPUT 2    /* syntax/type/format error */
#define LL_INTERNAL 3     /* unexpected failure; see ll_session_error */

ll_session* ll_session_new(void);
void ll_session_free(ll_session* s);

/* Default seed for the `verify` command. */
void ll_session_set_seed(ll_session* s, unsigned long long seed);
/* Default per-variable precision bound when a command has no `prec`. */
void ll_session_set_prec(ll_session* s, long long bound);

/* Executes a script fragment (newline/';'-separated statements).
 * record != 0 selects the structured line format instead of plain text.
 * *output receives the rendered output (may be empty); free it with
 * ll_string_free. Returns a status code. */
int ll_exec(ll_session* s, const char* text, int record, char** output);

/* Runs the verification suite. mutation is one of "none",
 * "wedge_sign_flip", "residue_index_off_by_one", "drop_nil_tail";
 * count <= 0 selects the default instance count. *report receives the
 * report lines plus a summary line. */
int ll_verify(ll_session* s, unsigned long long seed, int count,
              const char* mutation, char** report);

/* Message of the last LL_INTERNAL failure on this session ("" if none).
 * The pointer stays valid until the next call on the session. */
const char* ll_session_error(const ll_session* s);

void ll_string_free(char* p);

#ifdef __cplusplus
}
#endif

#endif /* LAURENTLAB_H */
