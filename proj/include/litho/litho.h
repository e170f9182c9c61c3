#ifndef LITHO_H
#define LITHO_H

/* C interface to the lithography engine. All functions return LITHO_OK on
 * success; on failure litho_last_error() describes the most recent error on
 * the calling thread. Objects returned through out-parameters are owned by
 * the caller and released with the matching _free function. */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  LITHO_OK = 0,
  LITHO_ERR_DOMAIN = 1, /* invalid input data or failed computation */
  LITHO_ERR_USAGE = 2   /* bad arguments (null pointers, unknown op names) */
} litho_status;

/* Thread-local message for the last failing call; empty string if none. */
const char* litho_last_error(void);

/* ---- layouts ---------------------------------------------------------- */

typedef struct litho_layout litho_layout;

litho_status litho_layout_load(const char* path, litho_layout** out);
litho_status litho_layout_save(const litho_layout* layout, const char* path);
void litho_layout_free(litho_layout* layout);

/* Report-only scan; *finding_count receives the number of findings. */
litho_status litho_layout_validate(const litho_layout* layout, int* finding_count);

/* ---- pipeline operations (file to file) ------------------------------- */

/* op: and | or | not | sub | xor | heal | size | touch. layer_b may be NULL
 * for unary ops; size_delta_dbu applies to "size" only. */
litho_status litho_boolean(const char* in_path, const char* out_path,
                           const char* op, const char* layer_a,
                           const char* layer_b, long long size_delta_dbu);

/* Builds a BVH over the polygon bounding boxes of the layout and runs
 * n_queries seeded random range queries; hit sets go to out_csv. */
litho_status litho_bvh_query(const char* in_path, const char* out_csv,
                             int n_queries, unsigned long long seed);

/* Violations to out_csv, near-threshold histogram to hist_csv (optional,
 * may be NULL). *violation_count receives the violation total. */
litho_status litho_mrc_check(const char* in_path, const char* rules_path,
                             const char* out_csv, const char* hist_csv,
                             int* violation_count);

/* Aerial (apply_resist = 0) or resist-filtered (1) image of the first layer
 * at the given focus and dose, written as AIMG. */
litho_status litho_image(const char* in_path, const char* config_path,
                         const char* out_aimg, double focus_nm, double dose,
                         int apply_resist);

/* Marching-squares contours of an AIMG at the threshold, written as CSV. */
litho_status litho_contour(const char* in_aimg, const char* out_csv,
                           double threshold);

/* EPE of AIMG contours against the target layout's segment gauges. The
 * image must cover the layout window produced by litho_image with the same
 * config. */
litho_status litho_measure(const char* layout_path, const char* config_path,
                           const char* in_aimg, const char* out_csv,
                           double threshold, double search_radius_nm);

/* Full OPC run. warm_start_csv (optional, may be NULL) supplies initial
 * per-segment offsets as "segment_id,offset_dbu" rows. Writes the corrected
 * layout and a per-iteration report CSV. */
litho_status litho_opc(const char* in_path, const char* config_path,
                       const char* rules_path, const char* out_path,
                       const char* report_csv, const char* warm_start_csv,
                       int* iterations, int* converged);

/* Training-tensor channels for the first layer: <prefix>_m0.aimg,
 * <prefix>_i0.aimg, <prefix>_grad.aimg plus <prefix>_norm.csv with the
 * affine channel normalizations. */
litho_status litho_ai_init(const char* in_path, const char* config_path,
                           const char* out_prefix);

/* suite: booleans | bvh | mrc | imaging | contour | controller | end-to-end */
litho_status litho_bench(const char* suite, int size, int repetitions,
                         unsigned long long seed, const char* out_csv);

/* 1 / ((1-p) + p/s); s may be INFINITY. Returns NaN on domain error. */
double litho_amdahl_bound(double p, double s);

#ifdef __cplusplus
}
#endif

#endif /* LITHO_H */
