#include "phishguard/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include <httplib.h>

namespace phishguard::features {

namespace {

const std::vector<std::string> kSchema = {
    "NumDots", "SubdomainLevel", "PathLevel", "UrlLength", "NumDash", "NumDashInHostname",
    "AtSymbol", "TildeSymbol", "NumUnderscore", "NumPercent", "NumQueryComponents",
    "NumAmpersand", "NumHash", "NumNumericChars", "NoHttps", "RandomString", "IpAddress",
    "DomainInSubdomains", "DomainInPaths", "HttpsInHostname", "HostnameLength", "PathLength",
    "QueryLength", "DoubleSlashInPath", "NumSensitiveWords", "EmbeddedBrandName",
    "PctExtHyperlinks", "PctExtResourceUrls", "ExtFavicon", "InsecureForms",
    "RelativeFormAction", "ExtFormAction", "AbnormalFormAction",
    "PctNullSelfRedirectHyperlinks", "FrequentDomainNameMismatch", "FakeLinkInStatusBar",
    "RightClickDisabled", "PopUpWindow", "SubmitInfoToEmail", "IframeOrFrame", "MissingTitle",
    "ImagesOnlyInForm", "SubdomainLevelRT", "UrlLengthRT", "PctExtResourceUrlsRT",
    "AbnormalExtFormActionR", "ExtMetaScriptLinkRT", "PctExtNullSelfRedirectHyperlinksRT"};

const std::vector<std::string> kTldTokens = {"com", "net",  "org", "edu",
                                             "gov", "info", "io",  "biz"};

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::size_t count_char(const std::string& s, char c) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), c));
}

std::size_t count_substr(const std::string& haystack, const std::string& needle) {
    if (needle.empty()) return 0;
    std::size_t count = 0, pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

// Heuristic: a hostname label with no vowels and length >= 8, or a
// consonant run of 5 or more.
bool looks_random(const std::string& label) {
    std::size_t letters = 0, vowels = 0, run = 0, max_run = 0;
    for (char c : label) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            ++letters;
            if (is_vowel(c)) {
                ++vowels;
                run = 0;
            } else {
                ++run;
                max_run = std::max(max_run, run);
            }
        } else {
            run = 0;
        }
    }
    if (letters >= 8 && vowels == 0) return true;
    return max_run >= 5;
}

bool is_dotted_quad(const std::string& host) {
    int octets = 0;
    std::size_t i = 0;
    while (i < host.size()) {
        if (!std::isdigit(static_cast<unsigned char>(host[i]))) return false;
        long value = 0;
        std::size_t digits = 0;
        while (i < host.size() && std::isdigit(static_cast<unsigned char>(host[i]))) {
            value = value * 10 + (host[i] - '0');
            ++digits;
            ++i;
        }
        if (digits == 0 || digits > 3 || value > 255) return false;
        ++octets;
        if (i < host.size()) {
            if (host[i] != '.') return false;
            ++i;
            if (i == host.size()) return false;
        }
    }
    return octets == 4;
}

}  // namespace

const std::vector<std::string>& schema() { return kSchema; }

std::size_t feature_index(const std::string& name) {
    for (std::size_t i = 0; i < kSchema.size(); ++i) {
        if (kSchema[i] == name) return i;
    }
    throw SchemaError("unknown feature name: " + name);
}

std::uint64_t schema_fingerprint() {
    // FNV-1a over the comma-joined ordered names.
    std::uint64_t h = 1469598103934665603ULL;
    bool first = true;
    for (const auto& name : kSchema) {
        if (!first) {
            h ^= static_cast<std::uint64_t>(',');
            h *= 1099511628211ULL;
        }
        first = false;
        for (char c : name) {
            h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
            h *= 1099511628211ULL;
        }
    }
    return h;
}

std::string UrlParts::serialize() const {
    std::string out = scheme + "://" + hostname + path;
    if (!query.empty()) out += "?" + query;
    if (!fragment.empty()) out += "#" + fragment;
    return out;
}

UrlParts parse_url(const std::string& text) {
    if (text.empty()) throw ParseError("empty URL");
    UrlParts parts;
    parts.full_text = text;

    std::string rest = text;
    const std::size_t scheme_pos = text.find("://");
    std::size_t authority_start = 0;
    if (scheme_pos != std::string::npos) {
        parts.scheme = to_lower(text.substr(0, scheme_pos));
        if (parts.scheme.empty() ||
            !std::all_of(parts.scheme.begin(), parts.scheme.end(), [](unsigned char c) {
                return std::isalnum(c) || c == '+' || c == '-' || c == '.';
            })) {
            throw ParseError("invalid scheme at position 0");
        }
        authority_start = scheme_pos + 3;
        rest = text.substr(authority_start);
    } else {
        parts.scheme = "http";
    }

    std::size_t authority_end = rest.find_first_of("/?#");
    std::string authority =
        authority_end == std::string::npos ? rest : rest.substr(0, authority_end);
    std::string tail = authority_end == std::string::npos ? "" : rest.substr(authority_end);

    // Drop userinfo.
    const std::size_t at = authority.rfind('@');
    if (at != std::string::npos) authority = authority.substr(at + 1);
    // Drop a port suffix.
    const std::size_t colon = authority.rfind(':');
    if (colon != std::string::npos &&
        std::all_of(authority.begin() + static_cast<long>(colon) + 1, authority.end(),
                    [](unsigned char c) { return std::isdigit(c); })) {
        authority = authority.substr(0, colon);
    }
    if (authority.empty()) {
        throw ParseError("empty host at position " + std::to_string(authority_start));
    }
    parts.hostname = to_lower(authority);
    parts.is_ip = is_dotted_quad(parts.hostname);

    // Registrable domain: naive last-two-labels rule; an IP is its own
    // registrable domain.
    if (parts.is_ip) {
        parts.registrable_domain = parts.hostname;
    } else {
        std::vector<std::string> labels;
        std::stringstream ss(parts.hostname);
        std::string label;
        while (std::getline(ss, label, '.')) labels.push_back(label);
        if (labels.size() <= 2) {
            parts.registrable_domain = parts.hostname;
        } else {
            parts.registrable_domain = labels[labels.size() - 2] + "." + labels.back();
            parts.subdomain_labels.assign(labels.begin(), labels.end() - 2);
        }
    }

    // Split the tail into path, query, fragment.
    std::size_t hash = tail.find('#');
    if (hash != std::string::npos) {
        parts.fragment = tail.substr(hash + 1);
        tail = tail.substr(0, hash);
    }
    std::size_t question = tail.find('?');
    if (question != std::string::npos) {
        parts.query = tail.substr(question + 1);
        tail = tail.substr(0, question);
    }
    parts.path = tail;
    std::stringstream ps(parts.path);
    std::string segment;
    while (std::getline(ps, segment, '/')) {
        if (!segment.empty()) parts.path_segments.push_back(segment);
    }
    return parts;
}

bool is_absolute_url(const std::string& href) {
    const std::size_t pos = href.find("://");
    if (pos == std::string::npos || pos == 0) return false;
    return std::all_of(href.begin(), href.begin() + static_cast<long>(pos),
                       [](unsigned char c) { return std::isalnum(c) || c == '+' || c == '-'; });
}

std::string registrable_of(const std::string& hostname) {
    const std::string host = to_lower(hostname);
    if (is_dotted_quad(host)) return host;
    std::vector<std::string> labels;
    std::stringstream ss(host);
    std::string label;
    while (std::getline(ss, label, '.')) labels.push_back(label);
    if (labels.size() <= 2) return host;
    return labels[labels.size() - 2] + "." + labels.back();
}

bool is_external(const UrlParts& base, const std::string& href) {
    if (!is_absolute_url(href)) {
        if (href.rfind("//", 0) == 0) {
            // Protocol-relative.
            try {
                return parse_url("http:" + href).registrable_domain != base.registrable_domain;
            } catch (const ParseError&) {
                return false;
            }
        }
        return false;
    }
    try {
        return parse_url(href).registrable_domain != base.registrable_domain;
    } catch (const ParseError&) {
        return false;
    }
}

bool is_null_self_redirect(const UrlParts& base, const std::string& href) {
    if (href.empty() || href == "#" || href[0] == '#') return true;
    const std::string low = to_lower(href);
    if (low.rfind("javascript:", 0) == 0) return true;
    if (is_absolute_url(href)) {
        try {
            UrlParts p = parse_url(href);
            return p.hostname == base.hostname && p.path == base.path && p.query == base.query;
        } catch (const ParseError&) {
            return false;
        }
    }
    return false;
}

FeatureVector extract_url_features(const UrlParts& parts, const ExtractConfig& config) {
    FeatureVector fv;
    fv.provenance.fill(Provenance::Unavailable);
    const std::string& url = parts.full_text;
    const std::string low = to_lower(url);

    auto set = [&](const char* name, double v) { fv.set(name, v, Provenance::FromUrl); };

    set("NumDots", static_cast<double>(count_char(url, '.')));
    set("SubdomainLevel", static_cast<double>(parts.subdomain_labels.size()));
    set("PathLevel", static_cast<double>(parts.path_segments.size()));
    set("UrlLength", static_cast<double>(url.size()));
    set("NumDash", static_cast<double>(count_char(url, '-')));
    set("NumDashInHostname", static_cast<double>(count_char(parts.hostname, '-')));
    set("AtSymbol", count_char(url, '@') > 0 ? 1.0 : 0.0);
    set("TildeSymbol", count_char(url, '~') > 0 ? 1.0 : 0.0);
    set("NumUnderscore", static_cast<double>(count_char(url, '_')));
    set("NumPercent", static_cast<double>(count_char(url, '%')));
    set("NumQueryComponents",
        parts.query.empty() ? 0.0 : static_cast<double>(1 + count_char(parts.query, '&')));
    set("NumAmpersand", static_cast<double>(count_char(url, '&')));
    set("NumHash", static_cast<double>(count_char(url, '#')));
    set("NumNumericChars",
        static_cast<double>(std::count_if(url.begin(), url.end(), [](unsigned char c) {
            return std::isdigit(c);
        })));
    set("NoHttps", parts.scheme == "https" ? 0.0 : 1.0);

    bool random_label = false;
    for (const auto& label : parts.subdomain_labels) random_label |= looks_random(label);
    if (!parts.is_ip && !parts.registrable_domain.empty()) {
        const std::string domain_label =
            parts.registrable_domain.substr(0, parts.registrable_domain.find('.'));
        random_label |= looks_random(domain_label);
    }
    set("RandomString", random_label ? 1.0 : 0.0);
    set("IpAddress", parts.is_ip ? 1.0 : 0.0);

    bool tld_in_subdomain = false;
    for (const auto& label : parts.subdomain_labels) {
        tld_in_subdomain |=
            std::find(kTldTokens.begin(), kTldTokens.end(), label) != kTldTokens.end();
    }
    set("DomainInSubdomains", tld_in_subdomain ? 1.0 : 0.0);
    bool tld_in_path = false;
    const std::string low_path = to_lower(parts.path);
    for (const auto& tld : kTldTokens) tld_in_path |= low_path.find("." + tld) != std::string::npos;
    set("DomainInPaths", tld_in_path ? 1.0 : 0.0);
    set("HttpsInHostname", parts.hostname.find("https") != std::string::npos ? 1.0 : 0.0);
    set("HostnameLength", static_cast<double>(parts.hostname.size()));
    set("PathLength", static_cast<double>(parts.path.size()));
    set("QueryLength", static_cast<double>(parts.query.size()));
    set("DoubleSlashInPath", parts.path.find("//") != std::string::npos ? 1.0 : 0.0);

    std::size_t sensitive = 0;
    for (const auto& word : config.sensitive_words) sensitive += count_substr(low, word);
    set("NumSensitiveWords", static_cast<double>(sensitive));

    bool brand = false;
    for (const auto& name : config.brand_names) {
        const std::string low_name = to_lower(name);
        if (parts.registrable_domain.find(low_name) != std::string::npos) continue;
        const std::string sub = [&] {
            std::string joined;
            for (const auto& label : parts.subdomain_labels) joined += label + ".";
            return joined;
        }();
        brand |= sub.find(low_name) != std::string::npos ||
                 low_path.find(low_name) != std::string::npos;
    }
    set("EmbeddedBrandName", brand ? 1.0 : 0.0);
    return fv;
}

void extract_content_features(const PageDocument& doc, FeatureVector& fv) {
    const PageInventory& inv = doc.inventory;
    const UrlParts& base = doc.base;
    auto set = [&](const char* name, double v) { fv.set(name, v, Provenance::FromContent); };

    std::size_t ext_anchors = 0, null_anchors = 0, ext_or_null = 0;
    std::map<std::string, std::size_t> domain_freq;
    for (const auto& href : inv.anchors) {
        const bool ext = is_external(base, href);
        const bool null_self = is_null_self_redirect(base, href);
        if (ext) ++ext_anchors;
        if (null_self) ++null_anchors;
        if (ext || null_self) ++ext_or_null;
        if (is_absolute_url(href)) {
            try {
                ++domain_freq[parse_url(href).registrable_domain];
            } catch (const ParseError&) {
            }
        } else {
            ++domain_freq[base.registrable_domain];
        }
    }
    const double n_anchors = static_cast<double>(inv.anchors.size());
    set("PctExtHyperlinks", n_anchors > 0 ? ext_anchors / n_anchors : 0.0);
    set("PctNullSelfRedirectHyperlinks", n_anchors > 0 ? null_anchors / n_anchors : 0.0);

    std::size_t ext_resources = 0;
    for (const auto& src : inv.resource_urls) {
        if (is_external(base, src)) ++ext_resources;
    }
    const double n_resources = static_cast<double>(inv.resource_urls.size());
    set("PctExtResourceUrls", n_resources > 0 ? ext_resources / n_resources : 0.0);
    set("ExtFavicon", !inv.favicon.empty() && is_external(base, inv.favicon) ? 1.0 : 0.0);

    bool insecure = false, relative = false, external_action = false, abnormal = false,
         mailto = false, images_only = false;
    for (const auto& form : inv.forms) {
        const std::string action = form.action;
        const std::string low_action = to_lower(action);
        if (low_action.rfind("mailto:", 0) == 0) {
            mailto = true;
            continue;
        }
        const bool is_abnormal = action.empty() || action == "#" ||
                                 low_action == "about:blank" ||
                                 low_action.rfind("javascript:", 0) == 0;
        abnormal |= is_abnormal;
        if (!is_abnormal) {
            if (is_absolute_url(action)) {
                try {
                    UrlParts ap = parse_url(action);
                    if (ap.scheme != "https") insecure = true;
                    if (ap.registrable_domain != base.registrable_domain) external_action = true;
                } catch (const ParseError&) {
                }
            } else {
                relative = true;
                if (base.scheme != "https") insecure = true;
            }
        } else {
            insecure = true;
        }
        if (form.has_image && !form.has_text_input) images_only = true;
    }
    set("InsecureForms", insecure ? 1.0 : 0.0);
    set("RelativeFormAction", relative ? 1.0 : 0.0);
    set("ExtFormAction", external_action ? 1.0 : 0.0);
    set("AbnormalFormAction", abnormal ? 1.0 : 0.0);
    set("SubmitInfoToEmail", mailto ? 1.0 : 0.0);
    set("ImagesOnlyInForm", images_only ? 1.0 : 0.0);

    bool mismatch = false;
    if (!domain_freq.empty()) {
        std::string top;
        std::size_t best = 0;
        for (const auto& [domain, count] : domain_freq) {
            if (count > best) {
                best = count;
                top = domain;
            }
        }
        mismatch = top != base.registrable_domain;
    }
    set("FrequentDomainNameMismatch", mismatch ? 1.0 : 0.0);

    // Static behavior patterns; scripts are never executed.
    const std::string& low = inv.lowered_html;
    set("FakeLinkInStatusBar", low.find("window.status") != std::string::npos ? 1.0 : 0.0);
    set("RightClickDisabled", low.find("contextmenu") != std::string::npos ||
                                      low.find("event.button==2") != std::string::npos
                                  ? 1.0
                                  : 0.0);
    set("PopUpWindow", low.find("window.open") != std::string::npos ? 1.0 : 0.0);
    set("IframeOrFrame", inv.iframe_count > 0 ? 1.0 : 0.0);
    set("MissingTitle", !inv.has_title || inv.title.empty() ? 1.0 : 0.0);
}

namespace {

double band(double value, double low, double high) {
    if (value < low) return 1.0;
    if (value <= high) return 0.0;
    return -1.0;
}

}  // namespace

void derive_rt_features(FeatureVector& fv) {
    auto set = [&](const char* name, double v) { fv.set(name, v, Provenance::RuleTerm); };

    const double level = fv.get("SubdomainLevel");
    set("SubdomainLevelRT", level <= 1 ? 1.0 : (level == 2 ? 0.0 : -1.0));
    set("UrlLengthRT", band(fv.get("UrlLength"), 54.0, 75.0));
    set("PctExtResourceUrlsRT", band(fv.get("PctExtResourceUrls") * 100.0, 22.0, 61.0));

    // Abnormal action dominates; an external action is suspicious; anything
    // else passes.
    double action_rt = 1.0;
    if (fv.get("AbnormalFormAction") == 1.0) {
        action_rt = -1.0;
    } else if (fv.get("ExtFormAction") == 1.0) {
        action_rt = 0.0;
    }
    set("AbnormalExtFormActionR", action_rt);

    set("ExtMetaScriptLinkRT", band(fv.get("PctExtResourceUrls") * 100.0, 17.0, 81.0));
    const double combined =
        (fv.get("PctExtHyperlinks") + fv.get("PctNullSelfRedirectHyperlinks")) * 100.0;
    set("PctExtNullSelfRedirectHyperlinksRT", band(combined, 31.0, 67.0));
}

FeatureVector extract(const std::string& url_text, const std::optional<std::string>& html,
                      const ExtractConfig& config) {
    UrlParts parts = parse_url(url_text);
    FeatureVector fv = extract_url_features(parts, config);
    if (html) {
        PageDocument doc = make_document(parts, *html);
        extract_content_features(doc, fv);
    }
    derive_rt_features(fv);
    return fv;
}

std::string csv_header() {
    std::string out = "id";
    for (const auto& name : kSchema) out += "," + name;
    out += ",CLASS_LABEL";
    return out;
}

std::string to_csv_row(const FeatureVector& fv, long id) {
    std::ostringstream os;
    os << id;
    for (double v : fv.values) {
        os << ",";
        if (v == std::floor(v) && std::abs(v) < 1e15) {
            os << static_cast<long long>(v);
        } else {
            os.precision(10);
            os << v;
        }
    }
    os << "," << (fv.label ? std::to_string(*fv.label) : std::string());
    return os.str();
}

PageDocument fetch_page(const std::string& url, int timeout_ms, std::size_t max_bytes) {
    UrlParts parts = parse_url(url);
    std::string origin = parts.scheme + "://" + parts.hostname;
    std::string target = parts.path.empty() ? "/" : parts.path;
    if (!parts.query.empty()) target += "?" + parts.query;

    std::string body;
    int redirects = 0;
    while (true) {
        httplib::Client client(origin);
        client.set_connection_timeout(0, timeout_ms * 1000);
        client.set_read_timeout(0, timeout_ms * 1000);
        client.set_follow_location(false);
        auto res = client.Get(target);
        if (!res) {
            throw FetchError("connect", "fetch failed for " + origin + target + ": " +
                                            httplib::to_string(res.error()));
        }
        if (res->status >= 300 && res->status < 400) {
            if (++redirects > 5) throw FetchError("protocol", "too many redirects");
            std::string location = res->get_header_value("Location");
            if (location.empty()) throw FetchError("protocol", "redirect without Location");
            if (is_absolute_url(location)) {
                parts = parse_url(location);
                origin = parts.scheme + "://" + parts.hostname;
                target = parts.path.empty() ? "/" : parts.path;
                if (!parts.query.empty()) target += "?" + parts.query;
            } else {
                target = location;
            }
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            throw FetchError("status", "HTTP status " + std::to_string(res->status));
        }
        body = res->body;
        break;
    }
    PageDocument doc;
    doc.base = parts;
    doc.truncated = body.size() > max_bytes;
    doc.html = doc.truncated ? body.substr(0, max_bytes) : body;
    doc.inventory = parse_html(doc.html);
    return doc;
}

std::vector<std::pair<std::string, double>> correlation_rank(
    const Matrix& x, const std::vector<int>& y, const std::vector<std::string>& names) {
    if (x.rows() < 2) throw InputError("correlation_rank: need at least 2 samples");
    if (names.size() != x.cols() || y.size() != x.rows()) {
        throw InputError("correlation_rank: name/label counts do not match the matrix");
    }
    bool has0 = false, has1 = false;
    for (int label : y) (label == 0 ? has0 : has1) = true;
    if (!has0 || !has1) throw InputError("correlation_rank: both labels must be present");

    const double n = static_cast<double>(x.rows());
    double mean_y = 0.0;
    for (int label : y) mean_y += label;
    mean_y /= n;
    double var_y = 0.0;
    for (int label : y) var_y += (label - mean_y) * (label - mean_y);

    std::vector<std::pair<std::string, double>> out;
    for (std::size_t c = 0; c < x.cols(); ++c) {
        double mean_x = 0.0;
        for (std::size_t r = 0; r < x.rows(); ++r) mean_x += x(r, c);
        mean_x /= n;
        double cov = 0.0, var_x = 0.0;
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const double dx = x(r, c) - mean_x;
            cov += dx * (y[r] - mean_y);
            var_x += dx * dx;
        }
        const double denom = std::sqrt(var_x * var_y);
        out.emplace_back(names[c], denom > 0.0 ? cov / denom : 0.0);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::abs(a.second) > std::abs(b.second);
    });
    return out;
}

}  // namespace phishguard::features
