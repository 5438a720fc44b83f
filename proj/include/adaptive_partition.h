/* C interface to the adaptive partition cluster simulator.
 *
 * All handles are opaque; every call that can fail returns an ap_status and
 * leaves a human-readable message in ap_last_error() (thread-local). Strings
 * returned through char** out-parameters are heap-allocated and must be
 * released with ap_free().
 */
#ifndef ADAPTIVE_PARTITION_H
#define ADAPTIVE_PARTITION_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct ap_cluster ap_cluster;

typedef enum {
  AP_OK = 0,
  AP_ERR_INVALID = 1,     /* bad input, config, or ineligible operation */
  AP_ERR_UNAVAILABLE = 2, /* node offline or no replica reachable */
  AP_ERR_IO = 3,          /* file read/write failure */
  AP_ERR_CONFLICT = 4,    /* duplicate id or table already online */
  AP_ERR_CORRUPT = 5,     /* checksum mismatch or invariant breach */
} ap_status;

#define AP_KEY_SPACE_GEO 0
#define AP_KEY_SPACE_ALPHA 1

typedef struct {
  long long optimum_count; /* C_O: records before a table splits */
  long long optimum_age;   /* A_O: maximum ticks a table stays live */
  int replicas;            /* K */
  int locations;           /* L */
  long long update_lead;   /* future-dating distance for index updates */
  long long retention;     /* ticks a closed table stays online */
  long long sync_delay;    /* message delivery delay */
  long long evaluate_every;
  unsigned long long seed;
  int key_space; /* AP_KEY_SPACE_GEO or AP_KEY_SPACE_ALPHA */
} ap_config;

void ap_config_default(ap_config* config);

/* nodes: comma-separated "id@location" entries, e.g. "n1@east,n2@west". */
ap_cluster* ap_cluster_create(const ap_config* config, const char* nodes);
ap_cluster* ap_cluster_load(const char* path);
ap_status ap_cluster_save(ap_cluster* c, const char* path);
void ap_cluster_destroy(ap_cluster* c);

const char* ap_last_error(void);

long long ap_cluster_now(const ap_cluster* c);

/* Steps the logical clock (evaluation active) until `tick` is reached. */
ap_status ap_cluster_advance_to(ap_cluster* c, long long tick);

/* Drains in-flight messages and pending updates without new evaluation. */
ap_status ap_cluster_quiesce(ap_cluster* c);

ap_status ap_cluster_catalog(ap_cluster* c, const char* node,
                             const char* device, double lat, double lon,
                             long long tick);

/* Result: one CSV row per record, "device,lat,lon,tick", sorted by
 * (tick, device). The time filter is the half-open [t_start, t_end). */
ap_status ap_cluster_query(ap_cluster* c, const char* node, double lat_min,
                           double lat_max, double lon_min, double lon_max,
                           long long t_start, long long t_end, char** out);

ap_status ap_cluster_dump_index(ap_cluster* c, char** out);
ap_status ap_cluster_summary(ap_cluster* c, char** out);

ap_status ap_cluster_fail_node(ap_cluster* c, const char* node);
ap_status ap_cluster_restore_node(ap_cluster* c, const char* node);
ap_status ap_cluster_add_node(ap_cluster* c, const char* node,
                              const char* location);
ap_status ap_cluster_force_age_out(ap_cluster* c);

ap_status ap_cluster_archive_table(ap_cluster* c, long long table_id,
                                   const char* path);
ap_status ap_cluster_restore_archive(ap_cluster* c, const char* path,
                                     long long* table_id);

/* Runs an event script (see the README for the grammar) and returns the
 * deterministic log. */
ap_status ap_cluster_run_script(ap_cluster* c, const char* script, char** out);

int ap_cluster_converged(const ap_cluster* c);

void ap_free(char* p);

#ifdef __cplusplus
}
#endif

#endif /* ADAPTIVE_PARTITION_H */
