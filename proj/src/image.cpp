#include "mrqm/image.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "filters.hpp"
#include "mrqm/error.hpp"
#include "random.hpp"

namespace mrqm {

ImageGrid::ImageGrid(std::size_t width, std::size_t height, std::vector<double> data, std::optional<Spacing> spacing)
    : width_(width), height_(height), data_(std::move(data)), spacing_(spacing) {
    if (width == 0 || height == 0) throw InvalidArgument("image dimensions must be positive");
    if (data_.size() != width * height) {
        throw InvalidArgument("data length " + std::to_string(data_.size()) + " does not match " +
                              std::to_string(width) + "x" + std::to_string(height));
    }
    for (double v : data_) {
        if (!std::isfinite(v)) throw DataError("image contains non-finite intensities");
    }
    if (spacing_ && !(spacing_->dx > 0.0 && spacing_->dy > 0.0)) throw InvalidArgument("spacing must be positive");
}

ImageGrid ImageGrid::filled(std::size_t width, std::size_t height, double value) {
    return ImageGrid(width, height, std::vector<double>(width * height, value));
}

ImageGrid ImageGrid::with_values(std::vector<double> data) const {
    return ImageGrid(width_, height_, std::move(data), spacing_);
}

LabelMask::LabelMask(std::size_t width, std::size_t height, std::vector<std::int32_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
    if (labels_.size() != width * height) throw InvalidArgument("label count does not match mask dimensions");
}

LabelMask LabelMask::from_image(const ImageGrid& image) {
    std::vector<std::int32_t> labels;
    labels.reserve(image.size());
    for (double v : image.values()) {
        const double r = std::round(v);
        if (r != v || r < std::numeric_limits<std::int32_t>::min() || r > std::numeric_limits<std::int32_t>::max()) {
            throw DataError("label mask values must be integers");
        }
        labels.push_back(static_cast<std::int32_t>(r));
    }
    return LabelMask(image.width(), image.height(), std::move(labels));
}

// ---------------------------------------------------------------------------
// Statistics

double percentile_sorted(std::span<const double> sorted, double k) {
    if (sorted.empty()) throw InvalidArgument("percentile of an empty sample");
    if (!(k >= 0.0 && k <= 100.0)) throw InvalidArgument("percentile must lie in [0, 100]");
    const double n = static_cast<double>(sorted.size());
    // Smallest rank r with r / n >= k / 100.
    double rank = std::ceil(k * n / 100.0);
    // Guard against k * n / 100 landing a hair above an integer.
    if (rank > 0.0 && (rank - 1.0) * 100.0 >= k * n) rank -= 1.0;
    const auto idx = static_cast<std::size_t>(std::clamp(rank - 1.0, 0.0, n - 1.0));
    return sorted[idx];
}

double mean_of(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

namespace {

double sum_sq_dev(std::span<const double> values) {
    const double m = mean_of(values);
    double acc = 0.0;
    for (double v : values) acc += (v - m) * (v - m);
    return acc;
}

} // namespace

double population_std(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::sqrt(sum_sq_dev(values) / static_cast<double>(values.size()));
}

double sample_std(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    return std::sqrt(sum_sq_dev(values) / static_cast<double>(values.size() - 1));
}

double IntensityStats::percentile(double k) const { return percentile_sorted(sorted_, k); }

IntensityStats compute_stats(const ImageGrid& image) {
    if (image.empty()) throw InvalidArgument("statistics of an empty image");
    IntensityStats s;
    s.sorted_.assign(image.values().begin(), image.values().end());
    std::sort(s.sorted_.begin(), s.sorted_.end());
    s.min = s.sorted_.front();
    s.max = s.sorted_.back();
    s.mean = mean_of(image.values());
    s.std = sample_std(image.values());
    s.median = percentile_sorted(s.sorted_, 50.0);
    return s;
}

// ---------------------------------------------------------------------------
// Data range

DataRangeMode DataRangeMode::parse(std::string_view text) {
    if (text == "per-image") return per_image();
    if (text == "pair") return pair();
    if (text == "dataset") return dataset();
    if (text.starts_with("fixed:")) {
        const std::string_view num = text.substr(6);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
        if (ec != std::errc() || ptr != num.data() + num.size() || !(v > 0.0) || !std::isfinite(v)) {
            throw InvalidArgument("invalid fixed data range '" + std::string(num) + "'");
        }
        return fixed(v);
    }
    throw InvalidArgument("unknown data range mode '" + std::string(text) +
                          "' (expected per-image, pair, dataset or fixed:<v>)");
}

std::string DataRangeMode::to_string() const {
    switch (kind) {
    case DataRangeKind::PerImage:
        return "per-image";
    case DataRangeKind::Pair:
        return "pair";
    case DataRangeKind::Dataset:
        return "dataset";
    case DataRangeKind::Fixed:
        return "fixed:" + format_double(fixed_value);
    }
    return {};
}

namespace {

std::pair<double, double> extrema(const ImageGrid& image) {
    const auto [lo, hi] = std::minmax_element(image.values().begin(), image.values().end());
    return {*lo, *hi};
}

} // namespace

double resolve_data_range(const DataRangeMode& mode, std::span<const ImageGrid* const> images) {
    if (mode.kind == DataRangeKind::Fixed) {
        if (!(mode.fixed_value > 0.0) || !std::isfinite(mode.fixed_value)) {
            throw DegenerateError("fixed data range must be positive");
        }
        return mode.fixed_value;
    }
    if (images.empty()) throw InvalidArgument("data range needs at least one image");
    std::size_t count = images.size();
    if (mode.kind == DataRangeKind::PerImage) count = 1;
    if (mode.kind == DataRangeKind::Pair && images.size() != 2) {
        throw InvalidArgument("pair data range needs exactly two images");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < count; ++i) {
        if (images[i] == nullptr || images[i]->empty()) throw InvalidArgument("data range of an empty image");
        const auto [a, b] = extrema(*images[i]);
        lo = std::min(lo, a);
        hi = std::max(hi, b);
    }
    const double range = hi - lo;
    if (!(range > 0.0)) throw DegenerateError("data range is zero (constant input)");
    return range;
}

double resolve_data_range(const DataRangeMode& mode, const ImageGrid& image) {
    const ImageGrid* ptrs[] = {&image};
    if (mode.kind == DataRangeKind::Pair) {
        const ImageGrid* pair[] = {&image, &image};
        return resolve_data_range(mode, pair);
    }
    return resolve_data_range(mode, ptrs);
}

double resolve_data_range(const DataRangeMode& mode, const ImageGrid& a, const ImageGrid& b) {
    const ImageGrid* ptrs[] = {&a, &b};
    return resolve_data_range(mode, ptrs);
}

// ---------------------------------------------------------------------------
// Raster I/O

RasterFormat format_from_path(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".npy") return RasterFormat::Npy;
    if (ext == ".pgm") return RasterFormat::Pgm;
    if (ext == ".csv") return RasterFormat::Csv;
    throw InvalidArgument("cannot infer raster format from '" + path.string() + "'");
}

RasterFormat parse_raster_format(std::string_view name) {
    if (name == "npy") return RasterFormat::Npy;
    if (name == "pgm") return RasterFormat::Pgm;
    if (name == "csv") return RasterFormat::Csv;
    throw InvalidArgument("unknown raster format '" + std::string(name) + "'");
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw DataError("cannot read '" + path.string() + "'");
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("cannot write '" + path.string() + "'");
}

template <typename T>
T read_le(const char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
        auto* b = reinterpret_cast<unsigned char*>(&v);
        std::reverse(b, b + sizeof(T));
    }
    return v;
}

template <typename T>
void append_le(std::string& out, T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) std::reverse(b, b + sizeof(T));
    out.append(b, sizeof(T));
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Value of `key` in a numpy header dict, up to the next top-level comma.
std::string_view npy_field(std::string_view header, std::string_view key) {
    const std::string quoted = "'" + std::string(key) + "'";
    const auto pos = header.find(quoted);
    if (pos == std::string_view::npos) throw DataError("NPY header lacks " + quoted);
    auto rest = header.substr(pos + quoted.size());
    rest = trim(rest);
    if (rest.empty() || rest.front() != ':') throw DataError("malformed NPY header");
    rest = trim(rest.substr(1));
    if (!rest.empty() && rest.front() == '(') {
        const auto close = rest.find(')');
        if (close == std::string_view::npos) throw DataError("malformed NPY shape");
        return rest.substr(0, close + 1);
    }
    const auto end = rest.find_first_of(",}");
    return trim(rest.substr(0, end));
}

} // namespace

std::string encode_npy(const ImageGrid& image) {
    std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (" + std::to_string(image.height()) +
                       ", " + std::to_string(image.width()) + "), }";
    const std::size_t preamble = 10;
    std::size_t total = preamble + dict.size() + 1;
    const std::size_t padded = (total + 63) / 64 * 64;
    dict.append(padded - total, ' ');
    dict.push_back('\n');
    std::string out;
    out.reserve(padded + image.size() * 8);
    out.append("\x93NUMPY", 6);
    out.push_back('\x01');
    out.push_back('\x00');
    append_le<std::uint16_t>(out, static_cast<std::uint16_t>(dict.size()));
    out += dict;
    for (double v : image.values()) append_le<double>(out, v);
    return out;
}

ImageGrid decode_npy(std::string_view bytes) {
    if (bytes.size() < 10 || bytes.substr(0, 6) != std::string_view("\x93NUMPY", 6)) {
        throw DataError("not an NPY file (bad magic)");
    }
    const auto major = static_cast<unsigned char>(bytes[6]);
    std::size_t header_len = 0;
    std::size_t offset = 0;
    if (major == 1) {
        header_len = read_le<std::uint16_t>(bytes.data() + 8);
        offset = 10;
    } else if (major == 2 || major == 3) {
        if (bytes.size() < 12) throw DataError("truncated NPY header");
        header_len = read_le<std::uint32_t>(bytes.data() + 8);
        offset = 12;
    } else {
        throw DataError("unsupported NPY version " + std::to_string(major));
    }
    if (bytes.size() < offset + header_len) throw DataError("truncated NPY header");
    const std::string_view header = bytes.substr(offset, header_len);
    const std::string_view descr = npy_field(header, "descr");
    const std::string_view fortran = npy_field(header, "fortran_order");
    const std::string_view shape_text = npy_field(header, "shape");

    std::vector<std::size_t> shape;
    {
        std::string_view s = shape_text.substr(1, shape_text.size() - 2);
        while (!(s = trim(s)).empty()) {
            const auto comma = s.find(',');
            const auto item = trim(s.substr(0, comma));
            if (!item.empty()) {
                std::size_t v = 0;
                const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
                if (ec != std::errc() || p != item.data() + item.size()) throw DataError("malformed NPY shape");
                shape.push_back(v);
            }
            if (comma == std::string_view::npos) break;
            s = s.substr(comma + 1);
        }
    }
    if (shape.size() != 2) throw DataError("expected 2D raster, NPY has " + std::to_string(shape.size()) + " dims");
    const std::size_t h = shape[0];
    const std::size_t w = shape[1];
    if (w == 0 || h == 0) throw DataError("NPY raster is empty");

    const std::string dtype = std::string(descr.substr(1, descr.size() - 2));
    std::size_t item = 0;
    if (dtype == "<f8" || dtype == "<i8" || dtype == "<u8") {
        item = 8;
    } else if (dtype == "<f4" || dtype == "<i4" || dtype == "<u4") {
        item = 4;
    } else if (dtype == "<i2" || dtype == "<u2") {
        item = 2;
    } else if (dtype == "|u1" || dtype == "|i1" || dtype == "|b1") {
        item = 1;
    } else {
        throw DataError("unsupported NPY dtype " + dtype);
    }
    const std::size_t data_offset = offset + header_len;
    if (bytes.size() != data_offset + w * h * item) throw DataError("NPY payload size does not match its shape");

    std::vector<double> values(w * h);
    const char* p = bytes.data() + data_offset;
    for (std::size_t i = 0; i < values.size(); ++i, p += item) {
        double v = 0.0;
        if (dtype == "<f8") v = read_le<double>(p);
        else if (dtype == "<f4") v = read_le<float>(p);
        else if (dtype == "<i8") v = static_cast<double>(read_le<std::int64_t>(p));
        else if (dtype == "<u8") v = static_cast<double>(read_le<std::uint64_t>(p));
        else if (dtype == "<i4") v = read_le<std::int32_t>(p);
        else if (dtype == "<u4") v = read_le<std::uint32_t>(p);
        else if (dtype == "<i2") v = read_le<std::int16_t>(p);
        else if (dtype == "<u2") v = read_le<std::uint16_t>(p);
        else if (dtype == "|i1") v = static_cast<signed char>(*p);
        else v = static_cast<unsigned char>(*p);
        values[i] = v;
    }
    if (fortran == "True") {
        std::vector<double> c_order(w * h);
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) c_order[r * w + c] = values[c * h + r];
        values.swap(c_order);
    } else if (fortran != "False") {
        throw DataError("malformed NPY fortran_order");
    }
    return ImageGrid(w, h, std::move(values));
}

ImageGrid decode_pgm(std::string_view bytes) {
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_uint = [&](const char* what) {
        skip_space();
        std::size_t v = 0;
        const auto [p, ec] = std::from_chars(bytes.data() + pos, bytes.data() + bytes.size(), v);
        if (ec != std::errc()) throw DataError(std::string("malformed PGM header: bad ") + what);
        pos = static_cast<std::size_t>(p - bytes.data());
        return v;
    };
    if (bytes.size() < 2 || bytes.substr(0, 2) != "P5") throw DataError("not a binary PGM (expected P5)");
    pos = 2;
    const std::size_t w = read_uint("width");
    const std::size_t h = read_uint("height");
    const std::size_t maxval = read_uint("maxval");
    if (w == 0 || h == 0) throw DataError("PGM raster is empty");
    if (maxval == 0 || maxval > 65535) throw DataError("PGM maxval out of range");
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        throw DataError("malformed PGM header");
    }
    ++pos;
    const std::size_t item = maxval < 256 ? 1 : 2;
    if (bytes.size() - pos != w * h * item) throw DataError("PGM payload size does not match its dimensions");
    std::vector<double> values(w * h);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto* b = reinterpret_cast<const unsigned char*>(bytes.data() + pos + i * item);
        values[i] = item == 1 ? b[0] : static_cast<double>((b[0] << 8) | b[1]);
    }
    return ImageGrid(w, h, std::move(values));
}

std::string encode_pgm(const ImageGrid& image) {
    double hi = 0.0;
    for (double v : image.values()) {
        if (v < 0.0 || v > 65535.0 || std::round(v) != v) {
            throw InvalidArgument("PGM output needs integer intensities in [0, 65535]");
        }
        hi = std::max(hi, v);
    }
    const int maxval = hi <= 255.0 ? 255 : 65535;
    std::string out = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n" +
                      std::to_string(maxval) + "\n";
    for (double v : image.values()) {
        const auto u = static_cast<unsigned>(v);
        if (maxval == 255) {
            out.push_back(static_cast<char>(u));
        } else {
            out.push_back(static_cast<char>(u >> 8));
            out.push_back(static_cast<char>(u & 0xFF));
        }
    }
    return out;
}

ImageGrid decode_csv_grid(std::string_view text) {
    std::vector<double> values;
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        std::size_t count = 0;
        while (true) {
            const auto comma = line.find(',');
            const std::string_view cell = trim(line.substr(0, comma));
            double v = 0.0;
            const auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc() || p != cell.data() + cell.size()) {
                throw DataError("CSV line " + std::to_string(line_no) + ": invalid number '" + std::string(cell) + "'");
            }
            values.push_back(v);
            ++count;
            if (comma == std::string_view::npos) break;
            line = line.substr(comma + 1);
        }
        if (height == 0) {
            width = count;
        } else if (count != width) {
            throw DataError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                            " values, found " + std::to_string(count));
        }
        ++height;
    }
    if (height == 0) throw DataError("CSV grid is empty");
    return ImageGrid(width, height, std::move(values));
}

std::string encode_csv_grid(const ImageGrid& image) {
    std::string out;
    for (std::size_t r = 0; r < image.height(); ++r) {
        for (std::size_t c = 0; c < image.width(); ++c) {
            if (c) out.push_back(',');
            out += format_double(image(r, c));
        }
        out.push_back('\n');
    }
    return out;
}

ImageGrid load_raster(const std::filesystem::path& path, RasterFormat format) {
    const std::string bytes = read_file(path);
    try {
        switch (format) {
        case RasterFormat::Npy:
            return decode_npy(bytes);
        case RasterFormat::Pgm:
            return decode_pgm(bytes);
        case RasterFormat::Csv:
            return decode_csv_grid(bytes);
        }
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    throw InvalidArgument("unknown raster format");
}

ImageGrid load_raster(const std::filesystem::path& path) { return load_raster(path, format_from_path(path)); }

void save_raster(const ImageGrid& image, const std::filesystem::path& path, RasterFormat format) {
    switch (format) {
    case RasterFormat::Npy:
        write_file(path, encode_npy(image));
        return;
    case RasterFormat::Pgm:
        write_file(path, encode_pgm(image));
        return;
    case RasterFormat::Csv:
        write_file(path, encode_csv_grid(image));
        return;
    }
}

void save_raster(const ImageGrid& image, const std::filesystem::path& path) {
    save_raster(image, path, format_from_path(path));
}

// ---------------------------------------------------------------------------
// Phantom

namespace {

struct Ellipse {
    double cy, cx, ry, rx, angle, value;

    bool contains(double y, double x) const {
        const double dy = y - cy;
        const double dx = x - cx;
        const double cs = std::cos(angle);
        const double sn = std::sin(angle);
        const double u = (dx * cs + dy * sn) / rx;
        const double v = (-dx * sn + dy * cs) / ry;
        return u * u + v * v <= 1.0;
    }
};

struct PhantomLayout {
    Ellipse head{};
    std::vector<Ellipse> layers;
    std::vector<Ellipse> ventricles;
    Ellipse lesion{};
};

constexpr double kLayerBase[] = {9000.0, 3000.0, 6500.0, 11000.0, 8000.0, 13000.0};

PhantomLayout phantom_layout(detail::Rng& rng, std::uint64_t seed, std::size_t width, std::size_t height) {
    const double w = static_cast<double>(width);
    const double h = static_cast<double>(height);
    PhantomLayout layout;
    const double cy = h / 2.0 + rng.uniform(-0.02, 0.02) * h;
    const double cx = w / 2.0 + rng.uniform(-0.02, 0.02) * w;
    const double ry = 0.44 * h * rng.uniform(0.97, 1.03);
    const double rx = 0.37 * w * rng.uniform(0.97, 1.03);
    const double tilt = rng.uniform(-0.08, 0.08);
    layout.head = {cy, cx, ry, rx, tilt, 0.0};

    const int count = 3 + static_cast<int>(seed % 4);
    for (int k = 0; k < count; ++k) {
        const double scale = 1.0 - 0.62 * static_cast<double>(k) / static_cast<double>(count);
        const double jitter = k == 0 ? 0.0 : 0.01;
        layout.layers.push_back({cy + rng.uniform(-jitter, jitter) * h, cx + rng.uniform(-jitter, jitter) * w,
                                 ry * scale * rng.uniform(0.98, 1.0), rx * scale * rng.uniform(0.98, 1.0),
                                 tilt + rng.uniform(-0.1, 0.1), kLayerBase[k] + rng.uniform(-400.0, 400.0)});
    }
    for (int side = -1; side <= 1; side += 2) {
        layout.ventricles.push_back({cy + rng.uniform(-0.03, 0.03) * h,
                                     cx + side * rng.uniform(0.05, 0.07) * w, rng.uniform(0.08, 0.11) * h,
                                     rng.uniform(0.025, 0.035) * w, side * rng.uniform(0.15, 0.3),
                                     3000.0 + rng.uniform(-300.0, 300.0)});
    }
    const double side = (seed >> 2) % 2 == 0 ? -1.0 : 1.0;
    const double lr = rng.uniform(0.035, 0.05) * w;
    layout.lesion = {cy + rng.uniform(-0.1, 0.1) * h, cx + side * rng.uniform(0.15, 0.25) * w, lr, lr, 0.0,
                     rng.uniform(17000.0, 19000.0)};
    return layout;
}

void check_phantom_size(std::size_t width, std::size_t height) {
    if (width < 64 || height < 64) throw InvalidArgument("phantom needs width and height >= 64");
}

} // namespace

ImageGrid make_phantom(std::uint64_t seed, std::size_t width, std::size_t height, PhantomInfo* info) {
    check_phantom_size(width, height);
    detail::Rng rng(seed);
    const PhantomLayout layout = phantom_layout(rng, seed, width, height);

    detail::Plane base(width, height);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            const double y = static_cast<double>(r) + 0.5;
            const double x = static_cast<double>(c) + 0.5;
            double v = 0.0;
            for (const Ellipse& e : layout.layers)
                if (e.contains(y, x)) v = e.value;
            for (const Ellipse& e : layout.ventricles)
                if (e.contains(y, x)) v = e.value;
            if (layout.lesion.contains(y, x)) v = layout.lesion.value;
            base.at(r, c) = v;
        }
    }

    detail::Plane noise(width, height);
    for (double& v : noise.data) v = rng.normal();
    noise = detail::gaussian_filter(noise, 0.5);
    const double noise_sd = population_std(noise.data);

    const double fy = rng.uniform(1.0, 2.5);
    const double fx = rng.uniform(1.0, 2.5);
    const double phase = rng.uniform(0.0, 2.0 * 3.141592653589793);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            const double y = static_cast<double>(r) / static_cast<double>(height);
            const double x = static_cast<double>(c) / static_cast<double>(width);
            const double slow = 1.0 + 0.05 * std::sin(2.0 * 3.141592653589793 * (fy * y + fx * x) + phase);
            base.at(r, c) *= slow * (1.0 + 0.08 * noise.at(r, c) / noise_sd);
        }
    }
    base = detail::gaussian_filter(base, 0.3);

    std::vector<double> values(width * height, 0.0);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            if (layout.head.contains(static_cast<double>(r) + 0.5, static_cast<double>(c) + 0.5)) {
                values[r * width + c] = std::max(base.at(r, c), 1.0);
            }
        }
    }
    if (info) {
        info->lesion_row = layout.lesion.cy;
        info->lesion_col = layout.lesion.cx;
        info->lesion_radius = layout.lesion.rx;
        info->tissue_layers = static_cast<int>(layout.layers.size());
    }
    return ImageGrid(width, height, std::move(values));
}

LabelMask make_phantom_lesion_mask(std::uint64_t seed, std::size_t width, std::size_t height) {
    check_phantom_size(width, height);
    detail::Rng rng(seed);
    const PhantomLayout layout = phantom_layout(rng, seed, width, height);
    std::vector<std::int32_t> labels(width * height, 0);
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c)
            if (layout.lesion.contains(static_cast<double>(r) + 0.5, static_cast<double>(c) + 0.5))
                labels[r * width + c] = 1;
    return LabelMask(width, height, std::move(labels));
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    std::string out(buf, ptr);
    if (out.find_first_of(".e") == std::string::npos) out += ".0";
    return out;
}

} // namespace mrqm
