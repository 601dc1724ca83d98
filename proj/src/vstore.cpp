#include "peacegrid/vstore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "peacegrid/crc64.hpp"
#include "peacegrid/errors.hpp"
#include "peacegrid/kernels.hpp"
#include "peacegrid/rng.hpp"

namespace peacegrid {

namespace {

constexpr char kMagic[4] = {'P', 'G', 'V', 'S'};
constexpr std::uint16_t kVersion = 1;

// Unit-norm slack for f32 vectors produced by normalize().
constexpr double kNormTolerance = 1e-4;

}  // namespace

std::optional<std::uint32_t> VectorStore::find_country_ordinal(const std::string& country) const {
    for (std::uint32_t i = 0; i < country_names_.size(); ++i) {
        if (country_names_[i] == country) return i;
    }
    return std::nullopt;
}

EmbeddedArticle VectorStore::record(std::size_t i) const {
    if (i >= size()) throw InternalError("store record index out of range");
    EmbeddedArticle out;
    out.id = ids_[i];
    out.country = country(i);
    out.peace_label = label(i);
    out.vector.values.assign(row(i), row(i) + dim_);
    return out;
}

std::vector<EmbeddedArticle> VectorStore::all_records() const {
    std::vector<EmbeddedArticle> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(record(i));
    return out;
}

bool VectorStore::operator==(const VectorStore& other) const {
    if (dim_ != other.dim_ || ids_ != other.ids_ || labels_ != other.labels_) return false;
    for (std::size_t i = 0; i < size(); ++i) {
        if (country(i) != other.country(i)) return false;
    }
    if (data_.size() != other.data_.size()) return false;
    return std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0;
}

VectorStore build_store(const std::vector<EmbeddedArticle>& items) {
    if (items.empty()) throw InputError("cannot build an empty vector store");

    VectorStore store;
    store.dim_ = items.front().vector.dim();
    if (store.dim_ == 0) {
        throw InputError("article '" + items.front().id + "' has an empty vector");
    }

    std::map<std::string, std::uint32_t> interned;
    store.data_.reserve(items.size() * store.dim_);
    store.ids_.reserve(items.size());
    store.country_ids_.reserve(items.size());
    store.labels_.reserve(items.size());

    for (const auto& item : items) {
        if (item.vector.dim() != store.dim_) {
            throw InputError("article '" + item.id + "' has dimension " +
                             std::to_string(item.vector.dim()) + ", store dimension is " +
                             std::to_string(store.dim_));
        }
        const double sq = kernels::squared_norm(item.vector.data(), store.dim_);
        if (std::abs(std::sqrt(sq) - 1.0) > kNormTolerance) {
            throw InputError("article '" + item.id + "' is not unit-normalized (|v| = " +
                             std::to_string(std::sqrt(sq)) + ")");
        }

        auto [it, inserted] = interned.try_emplace(
            item.country, static_cast<std::uint32_t>(store.country_names_.size()));
        if (inserted) store.country_names_.push_back(item.country);

        const std::size_t position = store.ids_.size();
        store.ids_.push_back(item.id);
        store.country_ids_.push_back(it->second);
        store.labels_.push_back(static_cast<std::uint8_t>(item.peace_label));
        store.data_.insert(store.data_.end(), item.vector.values.begin(),
                           item.vector.values.end());
        store.country_index_[item.country].push_back(position);
    }
    return store;
}

VectorStore balanced_sample(const VectorStore& store, std::uint64_t seed,
                            std::optional<std::size_t> cap) {
    if (cap && *cap == 0) throw InputError("balanced sample cap must be positive");

    std::size_t smallest = std::numeric_limits<std::size_t>::max();
    for (const auto& [country, positions] : store.country_index()) {
        smallest = std::min(smallest, positions.size());
    }
    std::size_t target = smallest;
    if (cap) target = std::min(target, *cap);

    // Sample over (id, position) pairs sorted by id, so the draw depends only
    // on the id set and the seed, never on record order.
    std::vector<EmbeddedArticle> picked;
    picked.reserve(target * store.country_index().size());
    for (const auto& [country, positions] : store.country_index()) {
        std::vector<std::pair<std::string, std::size_t>> pool;
        pool.reserve(positions.size());
        for (std::size_t p : positions) pool.emplace_back(store.id(p), p);
        std::sort(pool.begin(), pool.end());

        SplitMix64 rng(seed ^ fnv1a64(country));
        partial_shuffle(pool, target, rng);
        pool.resize(target);
        std::sort(pool.begin(), pool.end());
        for (const auto& [id, position] : pool) picked.push_back(store.record(position));
    }
    return build_store(picked);
}

std::vector<SearchHit> select_topk(const VectorStore& store, const double* scores, std::size_t k,
                                   const TopkFilter& filter) {
    struct Item {
        double similarity;
        std::size_t position;
    };
    // "Less" means better, so the heap front is the worst kept hit.
    auto better = [](const Item& a, const Item& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.position < b.position;
    };

    std::vector<Item> heap;
    heap.reserve(std::min(k, store.size()));
    for (std::size_t r = 0; r < store.size(); ++r) {
        if (filter.exclude_country && store.country_ordinal(r) == *filter.exclude_country)
            continue;
        if (filter.label && store.label(r) != *filter.label) continue;
        Item item{scores[r], r};
        if (heap.size() < k) {
            heap.push_back(item);
            std::push_heap(heap.begin(), heap.end(), better);
        } else if (better(item, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), better);
            heap.back() = item;
            std::push_heap(heap.begin(), heap.end(), better);
        }
    }
    std::sort(heap.begin(), heap.end(), better);

    std::vector<SearchHit> hits;
    hits.reserve(heap.size());
    for (const Item& item : heap) {
        hits.push_back(SearchHit{item.position, store.id(item.position), item.similarity});
    }
    return hits;
}

std::vector<SearchHit> query_topk(const VectorStore& store, const EmbeddingVector& q,
                                  std::size_t k,
                                  const std::optional<std::string>& exclude_country) {
    if (k == 0) throw InputError("top-k requires k >= 1");
    if (q.dim() != store.dim()) {
        throw InputError("query dimension " + std::to_string(q.dim()) +
                         " does not match store dimension " + std::to_string(store.dim()));
    }
    std::vector<double> scores(store.size());
    kernels::score_rows(store.data(), store.size(), store.dim(), q.data(), scores.data());

    TopkFilter filter;
    if (exclude_country) filter.exclude_country = store.find_country_ordinal(*exclude_country);
    return select_topk(store, scores.data(), k, filter);
}

namespace {

class ByteWriter {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        u32(bits);
    }
    void raw(const std::string& s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::size_t offset() const { return off_; }
    std::size_t remaining() const { return size_ - off_; }

    std::uint8_t u8() {
        need(1, "u8");
        return data_[off_++];
    }
    std::uint16_t u16() {
        need(2, "u16");
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(data_[off_ + i]) << (8 * i);
        off_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4, "u32");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[off_ + i]) << (8 * i);
        off_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8, "u64");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[off_ + i]) << (8 * i);
        off_ += 8;
        return v;
    }
    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
    std::string str(std::size_t n) {
        need(n, "string");
        std::string s(reinterpret_cast<const char*>(data_ + off_), n);
        off_ += n;
        return s;
    }

private:
    void need(std::size_t n, const char* what) {
        if (off_ + n > size_) {
            throw InputError("truncated store file: reading " + std::string(what) +
                             " at offset " + std::to_string(off_) + " needs " + std::to_string(n) +
                             " bytes, " + std::to_string(size_ - off_) + " remain");
        }
    }

    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t off_ = 0;
};

}  // namespace

void save_store(const VectorStore& store, const std::string& path) {
    ByteWriter w;
    w.raw(std::string(kMagic, 4));
    w.u16(kVersion);
    w.u32(static_cast<std::uint32_t>(store.dim()));
    w.u64(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        const std::string& id = store.id(i);
        const std::string& country = store.country(i);
        if (id.size() > 0xFFFF || country.size() > 0xFFFF) {
            throw InputError("article '" + id + "': id or country exceeds 65535 bytes");
        }
        w.u16(static_cast<std::uint16_t>(id.size()));
        w.raw(id);
        w.u16(static_cast<std::uint16_t>(country.size()));
        w.raw(country);
        w.u8(static_cast<std::uint8_t>(store.label(i)));
        const float* row = store.row(i);
        for (std::size_t d = 0; d < store.dim(); ++d) w.f32(row[d]);
    }

    Crc64 crc;
    crc.update(w.bytes().data(), w.bytes().size());
    w.u64(crc.value());

    // Write-then-rename so a crash never leaves a half-written store behind.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open '" + tmp + "' for writing");
        out.write(reinterpret_cast<const char*>(w.bytes().data()),
                  static_cast<std::streamsize>(w.bytes().size()));
        if (!out) throw InputError("failed writing store file '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw InputError("cannot move store file into place at '" + path + "': " + ec.message());
}

VectorStore load_store(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open store file '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());

    if (bytes.size() < 4 + 2 + 4 + 8 + 8) {
        throw InputError("truncated store file '" + path + "': " + std::to_string(bytes.size()) +
                         " bytes is smaller than the fixed header and checksum");
    }

    const std::size_t body_size = bytes.size() - 8;
    Crc64 crc;
    crc.update(bytes.data(), body_size);
    ByteReader tail(bytes.data() + body_size, 8);
    const std::uint64_t stored_crc = tail.u64();
    if (crc.value() != stored_crc) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "expected %016llx, found %016llx",
                      static_cast<unsigned long long>(crc.value()),
                      static_cast<unsigned long long>(stored_crc));
        throw InputError("store file '" + path + "' failed checksum: " + buf);
    }

    ByteReader r(bytes.data(), body_size);
    const std::string magic = r.str(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0) {
        throw InputError("store file '" + path + "' has bad magic bytes");
    }
    const std::uint16_t version = r.u16();
    if (version != kVersion) {
        throw InputError("store file '" + path + "' has unsupported version " +
                         std::to_string(version));
    }
    const std::uint32_t dim = r.u32();
    const std::uint64_t count = r.u64();
    if (dim == 0) throw InputError("store file '" + path + "' declares dimension 0");
    if (count == 0) throw InputError("store file '" + path + "' contains no records");

    std::vector<EmbeddedArticle> items;
    items.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        EmbeddedArticle item;
        item.id = r.str(r.u16());
        item.country = r.str(r.u16());
        const std::uint8_t label = r.u8();
        if (label > 1) {
            throw InputError("store file '" + path + "' record '" + item.id +
                             "' has invalid label byte " + std::to_string(label));
        }
        item.peace_label = static_cast<PeaceLabel>(label);
        item.vector.values.resize(dim);
        for (std::uint32_t d = 0; d < dim; ++d) item.vector.values[d] = r.f32();
        items.push_back(std::move(item));
    }
    if (r.remaining() != 0) {
        throw InputError("store file '" + path + "' has " + std::to_string(r.remaining()) +
                         " unexpected trailing bytes before the checksum");
    }
    return build_store(items);
}

}  // namespace peacegrid
