#include <algorithm>
#include <cmath>

#include "phishguard/dataset.hpp"
#include "phishguard/features.hpp"
#include "phishguard/neural.hpp"

namespace phishguard::dataset {

namespace {

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

double round_at_least(double v, double lo) { return std::max(lo, std::round(v)); }

double band(double value, double low, double high) {
    if (value < low) return 1.0;
    if (value <= high) return 0.0;
    return -1.0;
}

}  // namespace

// Class-conditional generator driven by a latent severity score. Phishing
// rows pull the score up, legitimate rows pull it down; a small label-flip
// rate keeps the classes overlapping so accuracy saturates below 1.
RawTable synthesize(std::size_t rows, std::uint64_t seed) {
    if (rows < 2) throw ParamError("synthesize: need at least 2 rows");
    SeededRng rng(seed);
    RawTable table;
    table.feature_names = features::schema();
    table.features = Matrix(rows, features::kFeatureCount);
    table.labels.resize(rows);
    table.ids.resize(rows);

    const std::size_t positives = rows / 2;
    for (std::size_t r = 0; r < rows; ++r) {
        const int y = r < positives ? 1 : 0;
        table.ids[r] = static_cast<long>(r + 1);
        table.labels[r] = y;

        // 2% of rows carry the opposite class's profile.
        const bool flipped = rng.next_double() < 0.02;
        const int effective = flipped ? 1 - y : y;
        const double s = (effective == 1 ? 1.0 : -1.0) + rng.normal() * 0.38;

        auto bern = [&](double logit) {
            return rng.next_double() < sigmoid(logit) ? 1.0 : 0.0;
        };
        auto n = [&](double sd) { return rng.normal() * sd; };

        double v[features::kFeatureCount];
        v[0] = clamp(std::round(2.2 + 0.9 * s + n(0.8)), 1, 12);           // NumDots
        v[1] = round_at_least(0.7 + 0.7 * s + n(0.6), 0);                  // SubdomainLevel
        v[2] = round_at_least(2.0 + 1.1 * s + n(1.0), 0);                  // PathLevel
        v[3] = clamp(std::round(65 + 24 * s + n(13)), 12, 250);            // UrlLength
        v[4] = round_at_least(0.8 + 1.1 * s + n(1.0), 0);                  // NumDash
        v[5] = round_at_least(0.15 + 0.5 * s + n(0.45), 0);                // NumDashInHostname
        v[6] = bern(-4.0 + 1.2 * s);                                       // AtSymbol
        v[7] = bern(-4.5 + 0.3 * s);                                       // TildeSymbol
        v[8] = round_at_least(0.3 + 0.6 * s + n(0.7), 0);                  // NumUnderscore
        v[9] = round_at_least(0.1 + 0.45 * s + n(0.45), 0);                // NumPercent
        v[10] = round_at_least(0.8 + 0.4 * s + n(0.9), 0);                 // NumQueryComponents
        v[11] = std::max(0.0, v[10] - 1.0);                                // NumAmpersand
        v[12] = bern(-4.0);                                                // NumHash
        v[13] = round_at_least(3.0 + 3.2 * s + n(2.2), 0);                 // NumNumericChars
        v[14] = bern(0.2 + 2.4 * s);                                       // NoHttps
        v[15] = bern(-1.1 + 1.8 * s);                                      // RandomString
        v[16] = bern(-3.2 + 2.2 * s);                                      // IpAddress
        v[17] = bern(-3.0 + 1.7 * s);                                      // DomainInSubdomains
        v[18] = bern(-2.8 + 1.9 * s);                                      // DomainInPaths
        v[19] = bern(-5.0 + 2.0 * s);                                      // HttpsInHostname
        v[20] = clamp(std::round(16 + 5.0 * s + n(4.0)), 4, 80);           // HostnameLength
        v[21] = clamp(std::round(18 + 9 * s + n(8.0)), 0, 150);            // PathLength
        v[22] = round_at_least(8 + 3 * s + n(7.0), 0);                     // QueryLength
        v[23] = bern(-4.0 + 1.4 * s);                                      // DoubleSlashInPath
        v[24] = round_at_least(0.25 + 1.3 * s + n(0.5), 0);                // NumSensitiveWords
        v[25] = bern(-2.4 + 2.1 * s);                                      // EmbeddedBrandName
        v[26] = sigmoid(-0.6 + 2.6 * s + n(0.7));                          // PctExtHyperlinks
        v[27] = sigmoid(-0.5 + 2.3 * s + n(0.7));                          // PctExtResourceUrls
        v[28] = bern(-1.7 + 1.9 * s);                                      // ExtFavicon
        v[29] = bern(-0.5 + 2.6 * s);                                      // InsecureForms
        v[30] = bern(-1.5 + 0.8 * s);                                      // RelativeFormAction
        v[31] = bern(-2.0 + 1.8 * s);                                      // ExtFormAction
        v[32] = bern(-2.5 + 1.7 * s);                                      // AbnormalFormAction
        v[33] = rng.next_double() < sigmoid(-1.2 + 2.3 * s)
                    ? rng.uniform(0.2, 1.0)
                    : rng.uniform(0.0, 0.05);  // PctNullSelfRedirectHyperlinks
        v[34] = bern(-1.6 + 2.4 * s);                                      // FrequentDomainNameMismatch
        v[35] = bern(-3.5 + 1.5 * s);                                      // FakeLinkInStatusBar
        v[36] = bern(-3.2 + 1.4 * s);                                      // RightClickDisabled
        v[37] = bern(-2.5 + 0.9 * s);                                      // PopUpWindow
        v[38] = bern(-3.0 + 1.9 * s);                                      // SubmitInfoToEmail
        v[39] = bern(-1.0 + 1.0 * s);                                      // IframeOrFrame
        v[40] = bern(-2.8 + 1.6 * s);                                      // MissingTitle
        v[41] = bern(-3.0 + 1.2 * s);                                      // ImagesOnlyInForm
        v[42] = v[1] <= 1 ? 1.0 : (v[1] == 2 ? 0.0 : -1.0);                // SubdomainLevelRT
        v[43] = band(v[3], 54.0, 75.0);                                    // UrlLengthRT
        v[44] = band(v[27] * 100.0, 22.0, 61.0);                           // PctExtResourceUrlsRT
        v[45] = v[32] == 1.0 ? -1.0 : (v[31] == 1.0 ? 0.0 : 1.0);          // AbnormalExtFormActionR
        v[46] = band(v[27] * 100.0, 17.0, 81.0);                           // ExtMetaScriptLinkRT
        v[47] = band((v[26] + v[33]) * 100.0, 31.0, 67.0);  // PctExtNullSelfRedirectHyperlinksRT

        for (std::size_t c = 0; c < features::kFeatureCount; ++c) table.features(r, c) = v[c];
    }
    return table;
}

}  // namespace phishguard::dataset
