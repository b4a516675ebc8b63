#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <Eigen/Dense>
#include <json.hpp>

#include "filters.hpp"
#include "mrqm/error.hpp"
#include "mrqm/nr_metrics.hpp"

namespace mrqm {

namespace {

using json = nlohmann::json;

// Shape grid 0.2, 0.201, ..., 10 with rho(a) = Gamma(2/a)^2 / (Gamma(1/a) Gamma(3/a)).
struct ShapeTable {
    std::vector<double> shape;
    std::vector<double> rho;

    ShapeTable() {
        for (int i = 200; i <= 10000; ++i) {
            const double a = i / 1000.0;
            shape.push_back(a);
            rho.push_back(std::exp(2.0 * std::lgamma(2.0 / a) - std::lgamma(1.0 / a) - std::lgamma(3.0 / a)));
        }
    }

    double match(double target) const {
        std::size_t best = 0;
        double best_err = std::abs(rho[0] - target);
        for (std::size_t i = 1; i < rho.size(); ++i) {
            const double err = std::abs(rho[i] - target);
            if (err < best_err) {
                best_err = err;
                best = i;
            }
        }
        return shape[best];
    }
};

const ShapeTable& shape_table() {
    static const ShapeTable table;
    return table;
}

struct Mscn {
    detail::Plane coefficients;
    detail::Plane deviation;
};

Mscn compute_mscn(const detail::Plane& in, double c) {
    // Working on mean-removed values keeps the local variance free of a
    // large constant that would otherwise cancel.
    const double offset = mean_of(in.data);
    detail::Plane x = in;
    for (double& v : x.data) v -= offset;
    const auto kernel = detail::gaussian_kernel(7.0 / 6.0, 3);
    const detail::Plane mu = detail::filter_separable(x, kernel);
    const detail::Plane sq = detail::filter_separable(detail::multiply(x, x), kernel);
    // Deviations at round-off level (flat regions) are set to exactly zero so
    // their signs do not depend on the input offset.
    double extent = 0.0;
    for (double v : x.data) extent = std::max(extent, std::abs(v));
    const double tiny = 1e-9 * extent;
    Mscn out{detail::Plane(in.width, in.height), detail::Plane(in.width, in.height)};
    for (std::size_t i = 0; i < x.size(); ++i) {
        double sd = std::sqrt(std::max(0.0, sq.data[i] - mu.data[i] * mu.data[i]));
        if (sd <= tiny) sd = 0.0;
        const double dev = x.data[i] - mu.data[i];
        out.deviation.data[i] = sd;
        out.coefficients.data[i] = std::abs(dev) <= tiny ? 0.0 : dev / (sd + c);
    }
    return out;
}

// Features of the rectangle [r0, r0 + h) x [c0, c0 + w) of an MSCN plane.
NssFeatures features_of(const detail::Plane& m, std::size_t r0, std::size_t c0, std::size_t w, std::size_t h) {
    std::vector<double> values;
    values.reserve(w * h);
    for (std::size_t r = r0; r < r0 + h; ++r)
        for (std::size_t c = c0; c < c0 + w; ++c) values.push_back(m.at(r, c));
    NssFeatures f{};
    const GgdFit g = fit_ggd(values);
    f[0] = g.shape;
    f[1] = g.variance;
    // H, V, D1, D2 neighbour offsets (row, column).
    constexpr long kOffsets[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};
    for (int k = 0; k < 4; ++k) {
        const long dr = kOffsets[k][0], dc = kOffsets[k][1];
        std::vector<double> products;
        products.reserve(w * h);
        for (long r = 0; r + dr < static_cast<long>(h); ++r) {
            for (long c = std::max(0L, -dc); c < static_cast<long>(w) && c + dc < static_cast<long>(w); ++c) {
                const auto rr = r0 + static_cast<std::size_t>(r), cc = c0 + static_cast<std::size_t>(c);
                products.push_back(m.at(rr, cc) * m.at(rr + static_cast<std::size_t>(dr), cc + dc));
            }
        }
        const AggdFit a = fit_aggd(products);
        f[2 + 4 * k] = a.shape;
        f[3 + 4 * k] = a.mean;
        f[4 + 4 * k] = a.left_variance;
        f[5 + 4 * k] = a.right_variance;
    }
    return f;
}

// ---------------------------------------------------------------------------
// base64 of little-endian float64 arrays

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string encode_doubles(const std::vector<double>& values) {
    std::string bytes;
    bytes.reserve(values.size() * 8);
    for (double v : values) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
    }
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        std::uint32_t chunk = static_cast<std::uint8_t>(bytes[i]) << 16;
        if (i + 1 < bytes.size()) chunk |= static_cast<std::uint8_t>(bytes[i + 1]) << 8;
        if (i + 2 < bytes.size()) chunk |= static_cast<std::uint8_t>(bytes[i + 2]);
        out.push_back(kAlphabet[(chunk >> 18) & 63]);
        out.push_back(kAlphabet[(chunk >> 12) & 63]);
        out.push_back(i + 1 < bytes.size() ? kAlphabet[(chunk >> 6) & 63] : '=');
        out.push_back(i + 2 < bytes.size() ? kAlphabet[chunk & 63] : '=');
    }
    return out;
}

std::vector<double> decode_doubles(const std::string& text, std::size_t expected) {
    auto index = [](char ch) -> int {
        if (ch >= 'A' && ch <= 'Z') return ch - 'A';
        if (ch >= 'a' && ch <= 'z') return ch - 'a' + 26;
        if (ch >= '0' && ch <= '9') return ch - '0' + 52;
        if (ch == '+') return 62;
        if (ch == '/') return 63;
        return -1;
    };
    if (text.size() % 4 != 0) throw DataError("NIQE model: base64 length is not a multiple of 4");
    std::string bytes;
    for (std::size_t i = 0; i < text.size(); i += 4) {
        std::uint32_t chunk = 0;
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char ch = text[i + k];
            if (ch == '=' && i + 4 == text.size() && k >= 2) {
                ++pad;
                chunk <<= 6;
                continue;
            }
            const int v = index(ch);
            if (v < 0 || pad > 0) throw DataError("NIQE model: invalid base64 data");
            chunk = (chunk << 6) | static_cast<std::uint32_t>(v);
        }
        bytes.push_back(static_cast<char>((chunk >> 16) & 0xFF));
        if (pad < 2) bytes.push_back(static_cast<char>((chunk >> 8) & 0xFF));
        if (pad < 1) bytes.push_back(static_cast<char>(chunk & 0xFF));
    }
    if (bytes.size() != expected * 8) throw DataError("NIQE model: array has the wrong length");
    std::vector<double> out(expected);
    for (std::size_t j = 0; j < expected; ++j) {
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes[j * 8 + i])) << (8 * i);
        out[j] = std::bit_cast<double>(bits);
    }
    return out;
}

std::string utc_date() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[16];
    std::strftime(buf, sizeof buf, "%Y-%m-%d", &tm);
    return buf;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

using FeatureRows = std::vector<std::array<double, kNiqeFeatures>>;

void moments(const FeatureRows& rows, std::vector<double>& mean, std::vector<double>& cov) {
    const std::size_t n = rows.size();
    mean.assign(kNiqeFeatures, 0.0);
    cov.assign(kNiqeFeatures * kNiqeFeatures, 0.0);
    for (const auto& row : rows)
        for (std::size_t i = 0; i < kNiqeFeatures; ++i) mean[i] += row[i];
    for (double& m : mean) m /= static_cast<double>(n);
    if (n < 2) return;
    for (const auto& row : rows)
        for (std::size_t i = 0; i < kNiqeFeatures; ++i)
            for (std::size_t j = 0; j < kNiqeFeatures; ++j) cov[i * kNiqeFeatures + j] += (row[i] - mean[i]) * (row[j] - mean[j]);
    for (double& c : cov) c /= static_cast<double>(n - 1);
}

} // namespace

GgdFit fit_ggd(std::span<const double> values) {
    if (values.empty()) throw InvalidArgument("GGD fit needs values");
    double abs_sum = 0.0, sq_sum = 0.0;
    for (double v : values) {
        abs_sum += std::abs(v);
        sq_sum += v * v;
    }
    const double n = static_cast<double>(values.size());
    if (!(sq_sum > 0.0)) throw DegenerateError("GGD fit is undefined for all-zero coefficients");
    const double mean_abs = abs_sum / n;
    const double variance = sq_sum / n;
    return {shape_table().match(mean_abs * mean_abs / variance), variance};
}

AggdFit fit_aggd(std::span<const double> values) {
    if (values.empty()) throw InvalidArgument("AGGD fit needs values");
    double left_sq = 0.0, right_sq = 0.0, abs_sum = 0.0, sq_sum = 0.0;
    std::size_t left_n = 0, right_n = 0;
    for (double v : values) {
        if (v < 0.0) {
            left_sq += v * v;
            ++left_n;
        } else if (v > 0.0) {
            right_sq += v * v;
            ++right_n;
        }
        abs_sum += std::abs(v);
        sq_sum += v * v;
    }
    if (left_n == 0 || right_n == 0) throw DegenerateError("AGGD fit needs both negative and positive values");
    const double n = static_cast<double>(values.size());
    const double sigma_l = std::sqrt(left_sq / static_cast<double>(left_n));
    const double sigma_r = std::sqrt(right_sq / static_cast<double>(right_n));
    const double gamma = sigma_l / sigma_r;
    const double r_hat = (abs_sum / n) * (abs_sum / n) / (sq_sum / n);
    const double big_r =
        r_hat * (gamma * gamma * gamma + 1.0) * (gamma + 1.0) / ((gamma * gamma + 1.0) * (gamma * gamma + 1.0));
    const double shape = shape_table().match(big_r);
    const double ratio = std::exp(std::lgamma(1.0 / shape) - std::lgamma(3.0 / shape));
    const double beta_l = sigma_l * std::sqrt(ratio);
    const double beta_r = sigma_r * std::sqrt(ratio);
    const double mean = (beta_r - beta_l) * std::exp(std::lgamma(2.0 / shape) - std::lgamma(1.0 / shape));
    return {shape, mean, sigma_l * sigma_l, sigma_r * sigma_r};
}

ImageGrid mscn(const ImageGrid& image, double c) {
    if (image.empty()) throw InvalidArgument("MSCN input is empty");
    if (!(c > 0.0)) throw InvalidArgument("MSCN stabilizer C must be positive");
    return image.with_values(compute_mscn(detail::Plane(image), c).coefficients.data);
}

NssFeatures brisque_features(const ImageGrid& image, double c) {
    if (image.width() < 2 || image.height() < 2) throw InvalidArgument("BRISQUE needs at least a 2x2 image");
    if (!(c > 0.0)) throw InvalidArgument("MSCN stabilizer C must be positive");
    const auto m = compute_mscn(detail::Plane(image), c);
    return features_of(m.coefficients, 0, 0, image.width(), image.height());
}

BrisqueModel BrisqueModel::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("BRISQUE model: ") + e.what());
    }
    BrisqueModel m;
    try {
        const std::string kernel = j.value("kernel", "rbf");
        if (kernel == "linear") {
            m.kernel = Kernel::Linear;
        } else if (kernel == "rbf") {
            m.kernel = Kernel::Rbf;
        } else {
            throw DataError("BRISQUE model: unknown kernel '" + kernel + "'");
        }
        m.gamma = j.value("gamma", m.gamma);
        m.bias = j.value("bias", 0.0);
        for (const auto& sv : j.at("support_vectors")) {
            const auto v = sv.get<std::vector<double>>();
            if (v.size() != 18) throw DataError("BRISQUE model: support vectors need 18 values");
            NssFeatures f{};
            std::copy(v.begin(), v.end(), f.begin());
            m.support_vectors.push_back(f);
        }
        m.coefficients = j.at("coefficients").get<std::vector<double>>();
        if (j.contains("feature_min")) m.feature_min = j.at("feature_min").get<std::vector<double>>();
        if (j.contains("feature_max")) m.feature_max = j.at("feature_max").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw DataError(std::string("BRISQUE model: ") + e.what());
    }
    if (m.coefficients.size() != m.support_vectors.size()) {
        throw DataError("BRISQUE model: one coefficient per support vector is required");
    }
    if (m.feature_min.size() != m.feature_max.size() || (!m.feature_min.empty() && m.feature_min.size() != 18)) {
        throw DataError("BRISQUE model: feature_min and feature_max need 18 values each");
    }
    return m;
}

BrisqueModel BrisqueModel::load(const std::filesystem::path& path) { return from_json(read_text(path)); }

double BrisqueModel::predict(const NssFeatures& features) const {
    NssFeatures x = features;
    if (!feature_min.empty()) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double span = feature_max[i] - feature_min[i];
            x[i] = span > 0.0 ? -1.0 + 2.0 * (x[i] - feature_min[i]) / span : 0.0;
        }
    }
    double score = bias;
    for (std::size_t k = 0; k < support_vectors.size(); ++k) {
        const auto& sv = support_vectors[k];
        double kv = 0.0;
        if (kernel == Kernel::Linear) {
            for (std::size_t i = 0; i < x.size(); ++i) kv += sv[i] * x[i];
        } else {
            double d2 = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) d2 += (sv[i] - x[i]) * (sv[i] - x[i]);
            kv = std::exp(-gamma * d2);
        }
        score += coefficients[k] * kv;
    }
    return score;
}

double brisque_score(const ImageGrid& image, const BrisqueModel& model, double c) {
    return model.predict(brisque_features(image, c));
}

std::vector<std::array<double, kNiqeFeatures>> niqe_patch_features(const ImageGrid& image, std::size_t patch,
                                                                   double sharpness_percentile) {
    if (patch < 8 || patch % 2 != 0) throw InvalidArgument("NIQE patch size must be even and >= 8");
    if (image.width() < patch || image.height() < patch) {
        throw InvalidArgument("NIQE needs images of at least " + std::to_string(patch) + "x" + std::to_string(patch) +
                              " pixels");
    }
    const detail::Plane full(image);
    const auto m0 = compute_mscn(full, 1.0);
    const auto m1 = compute_mscn(detail::downsample2(full), 1.0);
    const std::size_t rows = image.height() / patch, cols = image.width() / patch, half = patch / 2;

    struct Candidate {
        double sharpness;
        std::array<double, kNiqeFeatures> features;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            Candidate cand{};
            try {
                const auto a = features_of(m0.coefficients, i * patch, j * patch, patch, patch);
                const auto b = features_of(m1.coefficients, i * half, j * half, half, half);
                std::copy(a.begin(), a.end(), cand.features.begin());
                std::copy(b.begin(), b.end(), cand.features.begin() + 18);
            } catch (const DegenerateError&) {
                continue;
            }
            double s = 0.0;
            for (std::size_t r = i * patch; r < (i + 1) * patch; ++r)
                for (std::size_t c = j * patch; c < (j + 1) * patch; ++c) s += m0.deviation.at(r, c);
            cand.sharpness = s / static_cast<double>(patch * patch);
            candidates.push_back(cand);
        }
    }
    std::vector<std::array<double, kNiqeFeatures>> out;
    if (candidates.empty()) return out;
    double threshold = -1.0;
    if (sharpness_percentile > 0.0) {
        std::vector<double> sharp;
        for (const auto& c : candidates) sharp.push_back(c.sharpness);
        std::sort(sharp.begin(), sharp.end());
        threshold = percentile_sorted(sharp, sharpness_percentile);
    }
    for (const auto& c : candidates) {
        if (c.sharpness >= threshold) out.push_back(c.features);
    }
    return out;
}

NiqeModel niqe_fit(std::span<const ImageGrid> corpus, const NiqeFitParams& params) {
    if (corpus.size() < params.min_images) {
        throw InvalidArgument("NIQE fit needs at least " + std::to_string(params.min_images) + " images, got " +
                              std::to_string(corpus.size()));
    }
    if (!(params.sharpness_percentile >= 0.0 && params.sharpness_percentile <= 100.0)) {
        throw InvalidArgument("NIQE sharpness percentile must lie in [0, 100]");
    }
    for (const auto& img : corpus) {
        if (img.width() < params.patch || img.height() < params.patch) {
            throw InvalidArgument("NIQE fit: every image needs at least one " + std::to_string(params.patch) + "x" +
                                  std::to_string(params.patch) + " patch");
        }
    }
    std::vector<FeatureRows> per_image(corpus.size());
    std::vector<std::exception_ptr> errors(corpus.size());
    unsigned threads = params.threads ? params.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(corpus.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < corpus.size(); i += threads) {
                try {
                    per_image[i] = niqe_patch_features(corpus[i], params.patch, params.sharpness_percentile);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    FeatureRows rows;
    for (const auto& f : per_image) rows.insert(rows.end(), f.begin(), f.end());
    if (rows.size() < 2) throw DegenerateError("NIQE fit found fewer than 2 usable patches");

    NiqeModel model;
    moments(rows, model.mean, model.covariance);
    model.patch = params.patch;
    model.sharpness_percentile = params.sharpness_percentile;
    model.corpus_size = corpus.size();
    model.patch_count = rows.size();
    model.created = utc_date();
    return model;
}

double niqe_score(const ImageGrid& image, const NiqeModel& model, bool use_pinv) {
    if (model.mean.size() != kNiqeFeatures || model.covariance.size() != kNiqeFeatures * kNiqeFeatures) {
        throw InvalidArgument("NIQE model has the wrong dimensions");
    }
    const FeatureRows rows = niqe_patch_features(image, model.patch, 0.0);
    if (rows.empty()) throw DegenerateError("NIQE is undefined: no patch has usable statistics");
    std::vector<double> mean, cov;
    moments(rows, mean, cov);

    constexpr auto n = static_cast<Eigen::Index>(kNiqeFeatures);
    Eigen::MatrixXd m(n, n);
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i) = model.mean[i] - mean[i];
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto k = static_cast<std::size_t>(i * n + j);
            m(i, j) = 0.5 * (model.covariance[k] + cov[k]);
        }
    }
    m = 0.5 * (m + m.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double tol = std::max(lambda.cwiseAbs().maxCoeff(), 0.0) * static_cast<double>(n) *
                       std::numeric_limits<double>::epsilon();
    Eigen::VectorXd inv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (lambda(i) > tol) {
            inv(i) = 1.0 / lambda(i);
        } else if (use_pinv) {
            inv(i) = 0.0;
        } else {
            throw DegenerateError("NIQE covariance is singular and the pseudo-inverse is disabled");
        }
    }
    const Eigen::VectorXd proj = eig.eigenvectors().transpose() * d;
    const double q = proj.cwiseProduct(inv).dot(proj);
    return std::sqrt(std::max(0.0, q));
}

std::string NiqeModel::to_json() const {
    json j;
    j["format"] = "mrqm-niqe";
    j["version"] = 1;
    j["features"] = kNiqeFeatures;
    j["patch"] = patch;
    j["sharpness_percentile"] = sharpness_percentile;
    j["corpus_size"] = corpus_size;
    j["patch_count"] = patch_count;
    j["created"] = created;
    j["mean"] = encode_doubles(mean);
    j["covariance"] = encode_doubles(covariance);
    return j.dump(2) + "\n";
}

NiqeModel NiqeModel::from_json(const std::string& text) {
    NiqeModel m;
    try {
        const json j = json::parse(text);
        if (j.at("format").get<std::string>() != "mrqm-niqe") throw DataError("not a NIQE model file");
        if (j.at("version").get<int>() != 1) throw DataError("unsupported NIQE model version");
        if (j.at("features").get<std::size_t>() != kNiqeFeatures) throw DataError("NIQE model needs 36 features");
        m.patch = j.at("patch").get<std::size_t>();
        m.sharpness_percentile = j.at("sharpness_percentile").get<double>();
        m.corpus_size = j.at("corpus_size").get<std::size_t>();
        m.patch_count = j.at("patch_count").get<std::size_t>();
        m.created = j.at("created").get<std::string>();
        m.mean = decode_doubles(j.at("mean").get<std::string>(), kNiqeFeatures);
        m.covariance = decode_doubles(j.at("covariance").get<std::string>(), kNiqeFeatures * kNiqeFeatures);
    } catch (const json::exception& e) {
        throw DataError(std::string("NIQE model: ") + e.what());
    }
    return m;
}

void NiqeModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << to_json();
    if (!out) throw DataError("failed writing " + path.string());
}

NiqeModel NiqeModel::load(const std::filesystem::path& path) { return from_json(read_text(path)); }

} // namespace mrqm
