#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phishguard/error.hpp"
#include "phishguard/matrix.hpp"

namespace phishguard::features {

inline constexpr std::size_t kFeatureCount = 48;

// Canonical ordered schema of the 48-column representation. The dataset
// loader and the extractor share this single source of truth.
const std::vector<std::string>& schema();
std::size_t feature_index(const std::string& name);  // throws SchemaError
std::uint64_t schema_fingerprint();

struct UrlParts {
    std::string scheme;
    std::string hostname;             // lowercased
    std::string registrable_domain;   // last two labels, or the host itself for IPs
    std::vector<std::string> subdomain_labels;
    std::string path;                 // raw path, leading '/'
    std::vector<std::string> path_segments;  // non-empty segments
    std::string query;                // without '?'
    std::string fragment;             // without '#'
    std::string full_text;            // the input as given

    bool is_ip = false;
    std::string serialize() const;
};

// Generic URI decomposition. Scheme defaults to "http" when absent.
UrlParts parse_url(const std::string& text);

struct FormInfo {
    std::string action;
    std::string method;
    bool has_text_input = false;
    bool has_image = false;
};

struct PageInventory {
    std::vector<std::string> anchors;        // raw href values
    std::vector<FormInfo> forms;
    std::vector<std::string> images;         // img src values
    std::size_t iframe_count = 0;
    bool has_title = false;
    std::string title;
    std::string favicon;                     // link rel~=icon href, empty if none
    std::vector<std::string> resource_urls;  // img/script/link/iframe/embed sources
    std::vector<std::string> meta_script_link_urls;
    std::string lowered_html;                // for static behavior-pattern scans
};

// Best-effort tag scan; malformed input never throws. Pure function of the
// HTML text.
PageInventory parse_html(const std::string& html);

struct PageDocument {
    UrlParts base;
    std::string html;
    PageInventory inventory;
    bool truncated = false;
};

PageDocument make_document(const UrlParts& base, const std::string& html);

struct ExtractConfig {
    std::vector<std::string> sensitive_words = {"secure",  "account", "webscr", "login",
                                                "signin", "banking", "confirm"};
    std::vector<std::string> brand_names;  // empty by default so tests stay hermetic
};

enum class Provenance { FromUrl, FromContent, RuleTerm, Unavailable };

struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    std::array<Provenance, kFeatureCount> provenance{};
    std::optional<int> label;

    double get(const std::string& name) const { return values[feature_index(name)]; }
    void set(const std::string& name, double v, Provenance p) {
        const std::size_t i = feature_index(name);
        values[i] = v;
        provenance[i] = p;
    }
};

// URL-lexical subset; content features stay at their defaults (0,
// Unavailable).
FeatureVector extract_url_features(const UrlParts& parts, const ExtractConfig& config = {});
// Fills the content subset in place.
void extract_content_features(const PageDocument& doc, FeatureVector& fv);
// Derives the six ternary rule-term features from the raw ones.
void derive_rt_features(FeatureVector& fv);

// Full pipeline: URL features, content features when html is given, then
// rule terms.
FeatureVector extract(const std::string& url_text, const std::optional<std::string>& html,
                      const ExtractConfig& config = {});

std::string to_csv_row(const FeatureVector& fv, long id);
std::string csv_header();

// Single-page fetcher. Follows up to 5 redirects, truncates at max_bytes,
// never executes scripts.
PageDocument fetch_page(const std::string& url, int timeout_ms = 5000,
                        std::size_t max_bytes = 2 * 1024 * 1024);

// Pearson correlation of each feature column with the label, sorted by
// absolute value descending. Constant features get correlation 0.
std::vector<std::pair<std::string, double>> correlation_rank(
    const Matrix& x, const std::vector<int>& y, const std::vector<std::string>& names);

// Helpers shared with the evaluator and server.
bool is_absolute_url(const std::string& href);
std::string registrable_of(const std::string& hostname);
// True when href resolves to a different registrable domain than base.
bool is_external(const UrlParts& base, const std::string& href);
bool is_null_self_redirect(const UrlParts& base, const std::string& href);

}  // namespace phishguard::features
