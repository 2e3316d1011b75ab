#include "gramqubo/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "gramqubo/rng.hpp"

namespace gramqubo {

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string(), 0);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset, const std::string& file) {
    if (offset + 4 > bytes.size()) {
        throw DataError(file + ": truncated header at byte " + std::to_string(bytes.size()), bytes.size());
    }
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

struct IdxHeader {
    std::vector<std::uint32_t> dims;
    std::size_t data_offset = 0;
};

IdxHeader read_idx_header(const std::vector<unsigned char>& bytes, std::uint32_t expected_magic,
                          const std::string& file) {
    const std::uint32_t magic = read_be32(bytes, 0, file);
    if (magic != expected_magic) {
        std::ostringstream msg;
        msg << file << ": bad IDX magic 0x" << std::hex << magic << " at byte 0, expected 0x" << expected_magic;
        throw DataError(msg.str(), 0);
    }
    IdxHeader header;
    const std::size_t ndims = magic & 0xffU;
    for (std::size_t i = 0; i < ndims; ++i) {
        header.dims.push_back(read_be32(bytes, 4 + 4 * i, file));
    }
    header.data_offset = 4 + 4 * ndims;
    std::size_t payload = 1;
    for (auto d : header.dims) {
        payload *= d;
    }
    if (bytes.size() < header.data_offset + payload) {
        throw DataError(file + ": truncated payload, file ends at byte " + std::to_string(bytes.size()) +
                            " but " + std::to_string(header.data_offset + payload) + " bytes are declared",
                        bytes.size());
    }
    return header;
}

// For each output cell along one axis: (source index, overlap length) pairs.
std::vector<std::vector<std::pair<std::size_t, double>>> box_weights(std::size_t src, std::size_t dst) {
    std::vector<std::vector<std::pair<std::size_t, double>>> weights(dst);
    const double ratio = static_cast<double>(src) / static_cast<double>(dst);
    for (std::size_t o = 0; o < dst; ++o) {
        const double lo = ratio * static_cast<double>(o);
        const double hi = ratio * static_cast<double>(o + 1);
        for (auto s = static_cast<std::size_t>(lo); s < src && static_cast<double>(s) < hi; ++s) {
            const double overlap = std::min(hi, static_cast<double>(s + 1)) - std::max(lo, static_cast<double>(s));
            if (overlap > 0.0) {
                weights[o].emplace_back(s, overlap);
            }
        }
    }
    return weights;
}

int parse_int(std::string_view field, std::size_t line_no, const std::string& file) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
        field.remove_suffix(1);
    }
    int value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
        throw DataError(file + ":" + std::to_string(line_no) + ": not an integer: '" + std::string(field) + "'",
                        line_no);
    }
    return value;
}

}  // namespace

LabeledImages load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
    const auto image_bytes = read_file(images_path);
    const auto label_bytes = read_file(labels_path);
    const auto ih = read_idx_header(image_bytes, 0x00000803, images_path.string());
    const auto lh = read_idx_header(label_bytes, 0x00000801, labels_path.string());
    if (ih.dims[0] != lh.dims[0]) {
        throw DataError(images_path.string() + ": image count " + std::to_string(ih.dims[0]) +
                            " does not match label count " + std::to_string(lh.dims[0]) + " (byte 4)",
                        4);
    }
    const std::size_t count = ih.dims[0];
    const std::size_t rows = ih.dims[1];
    const std::size_t cols = ih.dims[2];
    if (rows == 0 || cols == 0) {
        throw DataError(images_path.string() + ": zero image dimension at byte 8", 8);
    }

    LabeledImages out;
    out.images.reserve(count);
    out.labels.reserve(count);
    const unsigned char* px = image_bytes.data() + ih.data_offset;
    for (std::size_t n = 0; n < count; ++n) {
        RawImage img(rows, cols);
        for (std::size_t i = 0; i < rows * cols; ++i) {
            img.pixels[i] = static_cast<double>(*px++) / 255.0;
        }
        out.images.push_back(std::move(img));
        out.labels.push_back(label_bytes[lh.data_offset + n]);
    }
    return out;
}

LabeledImages load_cifar10(const std::filesystem::path& batch_path) {
    constexpr std::size_t kPlane = 32 * 32;
    constexpr std::size_t kRecord = 1 + 3 * kPlane;
    const auto bytes = read_file(batch_path);
    if (bytes.size() % kRecord != 0) {
        const std::size_t bad = bytes.size() - bytes.size() % kRecord;
        throw DataError(batch_path.string() + ": length " + std::to_string(bytes.size()) +
                            " is not a multiple of 3073; partial record starts at byte " + std::to_string(bad),
                        bad);
    }
    LabeledImages out;
    const std::size_t count = bytes.size() / kRecord;
    out.images.reserve(count);
    out.labels.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        const std::size_t base = n * kRecord;
        const Label label = bytes[base];
        if (label >= 10) {
            throw DataError(batch_path.string() + ": label " + std::to_string(label) + " out of range at byte " +
                                std::to_string(base),
                            base);
        }
        RawImage img(32, 32);
        const unsigned char* r = bytes.data() + base + 1;
        const unsigned char* g = r + kPlane;
        const unsigned char* b = g + kPlane;
        for (std::size_t i = 0; i < kPlane; ++i) {
            const double lum = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
            img.pixels[i] = std::clamp(lum / 255.0, 0.0, 1.0);
        }
        out.images.push_back(std::move(img));
        out.labels.push_back(label);
    }
    return out;
}

LabeledImages load_digits_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string(), 0);
    }
    const std::string file = path.string();
    LabeledImages out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::vector<int> values;
        values.reserve(65);
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            values.push_back(parse_int(rest.substr(0, comma), line_no, file));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (values.size() != 65) {
            throw DataError(file + ":" + std::to_string(line_no) + ": expected 65 columns, found " +
                                std::to_string(values.size()),
                            line_no);
        }
        RawImage img(8, 8);
        for (std::size_t i = 0; i < 64; ++i) {
            if (values[i] < 0 || values[i] > 16) {
                throw DataError(file + ":" + std::to_string(line_no) + ": pixel " + std::to_string(values[i]) +
                                    " outside [0,16]",
                                line_no);
            }
            img.pixels[i] = values[i] / 16.0;
        }
        if (values[64] < 0 || values[64] >= 10) {
            throw DataError(file + ":" + std::to_string(line_no) + ": label " + std::to_string(values[64]) +
                                " outside [0,10)",
                            line_no);
        }
        out.images.push_back(std::move(img));
        out.labels.push_back(static_cast<Label>(values[64]));
    }
    return out;
}

RawImage downsample_to_8x8(const RawImage& img) {
    if (img.height < 8 || img.width < 8) {
        throw std::invalid_argument("downsample_to_8x8: input is " + std::to_string(img.height) + "x" +
                                    std::to_string(img.width) + ", smaller than 8x8");
    }
    if (img.height == 8 && img.width == 8) {
        return img;
    }
    const auto rw = box_weights(img.height, 8);
    const auto cw = box_weights(img.width, 8);
    const double area = (static_cast<double>(img.height) / 8.0) * (static_cast<double>(img.width) / 8.0);
    RawImage out(8, 8);
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 8; ++j) {
            double acc = 0.0;
            for (const auto& [r, wr] : rw[i]) {
                for (const auto& [c, wc] : cw[j]) {
                    acc += wr * wc * img.at(r, c);
                }
            }
            out.at(i, j) = std::clamp(acc / area, 0.0, 1.0);
        }
    }
    return out;
}

void downsample_all(LabeledImages& set) {
    for (auto& img : set.images) {
        if (img.height != 8 || img.width != 8) {
            img = downsample_to_8x8(img);
        }
    }
}

LabeledImages remap_label_range(const LabeledImages& set, Label first, std::size_t count) {
    LabeledImages out;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const Label l = set.labels[i];
        if (l >= first && l < first + count) {
            out.images.push_back(set.images[i]);
            out.labels.push_back(l - first);
        }
    }
    return out;
}

std::vector<std::size_t> select_per_class(std::span<const Label> labels, std::size_t num_classes,
                                          std::size_t skip, std::size_t take, std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> by_class(num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= num_classes) {
            throw std::invalid_argument("label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                                        " is not below num_classes " + std::to_string(num_classes));
        }
        by_class[labels[i]].push_back(i);
    }
    std::vector<std::size_t> selected;
    selected.reserve(num_classes * take);
    for (std::size_t c = 0; c < num_classes; ++c) {
        auto& idx = by_class[c];
        if (idx.size() < skip + take) {
            throw std::invalid_argument("class " + std::to_string(c) + " has " + std::to_string(idx.size()) +
                                        " examples, need " + std::to_string(skip + take));
        }
        Rng rng(mix_seed(seed, c));
        rng.shuffle(std::span(idx));
        selected.insert(selected.end(), idx.begin() + static_cast<std::ptrdiff_t>(skip),
                        idx.begin() + static_cast<std::ptrdiff_t>(skip + take));
    }
    return selected;
}

namespace {

void validate_spec(const SubsampleSpec& spec) {
    if (spec.train_per_class == 0 || spec.test_per_class == 0) {
        throw std::invalid_argument("subsample: per-class counts must be at least 1");
    }
}

void take(const LabeledImages& src, std::span<const std::size_t> idx, std::vector<RawImage>& images,
          std::vector<Label>& labels) {
    images.reserve(idx.size());
    labels.reserve(idx.size());
    for (auto i : idx) {
        images.push_back(src.images[i]);
        labels.push_back(src.labels[i]);
    }
}

}  // namespace

Dataset subsample(const LabeledImages& pool, const SubsampleSpec& spec, std::size_t num_classes,
                  std::string name) {
    validate_spec(spec);
    const auto train = select_per_class(pool.labels, num_classes, 0, spec.train_per_class, spec.seed);
    const auto test =
        select_per_class(pool.labels, num_classes, spec.train_per_class, spec.test_per_class, spec.seed);
    Dataset ds;
    ds.name = std::move(name);
    ds.num_classes = num_classes;
    take(pool, train, ds.train_images, ds.train_labels);
    take(pool, test, ds.test_images, ds.test_labels);
    return ds;
}

Dataset subsample(const LabeledImages& train, const LabeledImages& test, const SubsampleSpec& spec,
                  std::size_t num_classes, std::string name) {
    validate_spec(spec);
    const auto tr = select_per_class(train.labels, num_classes, 0, spec.train_per_class, spec.seed);
    const auto te = select_per_class(test.labels, num_classes, 0, spec.test_per_class, mix_seed(spec.seed, 1));
    Dataset ds;
    ds.name = std::move(name);
    ds.num_classes = num_classes;
    take(train, tr, ds.train_images, ds.train_labels);
    take(test, te, ds.test_images, ds.test_labels);
    return ds;
}

}  // namespace gramqubo
