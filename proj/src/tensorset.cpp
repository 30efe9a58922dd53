#include "fewsel/tensorset.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include <json.hpp>

#include "fewsel/error.hpp"

namespace fewsel {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'F', 'S', 'E', 'L', 'T', 'N', 'S', '1'};
constexpr std::uint32_t kFlagDists = 1u;
constexpr std::uint32_t kFlagHidden = 2u;
constexpr std::uint32_t kFlagSent = 4u;

// Explicit little-endian byte packing; independent of host endianness.
void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class ByteReader {
public:
    ByteReader(const std::string& buf, std::string path)
        : buf_(buf), path_(std::move(path)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i)
            v = (v << 8) | static_cast<std::uint8_t>(buf_[pos_ + static_cast<std::size_t>(i)]);
        pos_ += 4;
        return v;
    }

    float f32() { return std::bit_cast<float>(u32()); }

    void skip_magic() { pos_ += 8; }
    bool exhausted() const { return pos_ == buf_.size(); }

private:
    void need(std::size_t n) {
        if (pos_ + n > buf_.size()) throw ValidationError(path_ + ": truncated tensor file");
    }
    const std::string& buf_;
    std::string path_;
    std::size_t pos_ = 0;
};

struct RawEntry {
    std::size_t id = 0;
    TokenDists dists;
    std::vector<double> hidden;
    std::vector<double> sent;
};

TensorSet assemble(std::uint32_t C, std::uint32_t m, std::uint32_t flags,
                   std::vector<RawEntry> entries, const Corpus& corpus,
                   const std::string& path) {
    TensorSet ts;
    ts.num_classes = C;
    ts.max_tokens = m;
    ts.has_token_dists = (flags & kFlagDists) != 0;
    ts.has_hidden = (flags & kFlagHidden) != 0;
    ts.has_sent_embed = (flags & kFlagSent) != 0;

    const std::size_t n = corpus.size();
    if (ts.has_token_dists) ts.token_dists.resize(n);
    if (ts.has_hidden) ts.hidden.resize(n);
    if (ts.has_sent_embed) ts.sent_embed.resize(n);

    std::vector<bool> filled(n, false);
    for (auto& e : entries) {
        const auto pos = corpus.position_of(e.id);
        if (!pos) throw ValidationError(path + ": unknown id " + std::to_string(e.id));
        if (filled[*pos])
            throw ValidationError(path + ": duplicate tensor entry for id " + std::to_string(e.id));
        filled[*pos] = true;
        if (ts.has_token_dists) ts.token_dists[*pos] = std::move(e.dists);
        if (ts.has_hidden) ts.hidden[*pos] = std::move(e.hidden);
        if (ts.has_sent_embed) ts.sent_embed[*pos] = std::move(e.sent);
    }
    if (entries.size() != n)
        throw ValidationError(path + ": tensor count " + std::to_string(entries.size()) +
                              " does not cover corpus of " + std::to_string(n));
    validate_tensors(ts, corpus);
    return ts;
}

TensorSet load_binary(const std::string& buf, const Corpus& corpus, const std::string& path) {
    ByteReader rd(buf, path);
    rd.skip_magic();
    const std::uint32_t version = rd.u32();
    if (version != 1) throw ValidationError(path + ": unsupported tensor format version");
    const std::uint32_t C = rd.u32();
    const std::uint32_t m = rd.u32();
    const std::uint32_t count = rd.u32();
    const std::uint32_t flags = rd.u32();
    const std::uint32_t hidden_dim = rd.u32();
    const std::uint32_t sent_dim = rd.u32();

    std::vector<std::pair<std::uint32_t, std::uint32_t>> index(count);
    for (auto& [id, ntok] : index) {
        id = rd.u32();
        ntok = rd.u32();
    }
    for (std::size_t i = 1; i < index.size(); ++i) {
        if (index[i].first <= index[i - 1].first)
            throw ValidationError(path + ": index ids not strictly ascending");
    }

    std::vector<RawEntry> entries;
    entries.reserve(count);
    for (const auto& [id, ntok] : index) {
        RawEntry e;
        e.id = id;
        if (flags & kFlagDists) {
            e.dists.rows = ntok;
            e.dists.cols = C;
            e.dists.p.resize(static_cast<std::size_t>(ntok) * C);
            for (auto& v : e.dists.p) v = static_cast<double>(rd.f32());
        }
        if (flags & kFlagHidden) {
            e.hidden.resize(hidden_dim);
            for (auto& v : e.hidden) v = static_cast<double>(rd.f32());
        }
        if (flags & kFlagSent) {
            e.sent.resize(sent_dim);
            for (auto& v : e.sent) v = static_cast<double>(rd.f32());
        }
        entries.push_back(std::move(e));
    }
    if (!rd.exhausted()) throw ValidationError(path + ": trailing bytes after payload");
    return assemble(C, m, flags, std::move(entries), corpus, path);
}

TensorSet load_text(const std::string& buf, const Corpus& corpus, const std::string& path) {
    std::istringstream in(buf);
    std::string line;
    std::size_t line_no = 0;

    std::uint32_t C = 0, m = 128, flags = 0;
    std::vector<RawEntry> entries;
    bool have_header = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError(path + " line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!have_header) {
            if (!j.contains("classes"))
                throw ValidationError(path + ": first line must be a header with \"classes\"");
            C = j["classes"].get<std::uint32_t>();
            if (j.contains("max_tokens")) m = j["max_tokens"].get<std::uint32_t>();
            have_header = true;
            continue;
        }
        RawEntry e;
        if (!j.contains("id"))
            throw ValidationError(path + " line " + std::to_string(line_no) + ": missing id");
        e.id = j["id"].get<std::size_t>();
        if (j.contains("token_dists")) {
            const auto& rows = j["token_dists"];
            e.dists.rows = rows.size();
            e.dists.cols = C;
            for (const auto& row : rows) {
                if (row.size() != C)
                    throw ValidationError(path + " line " + std::to_string(line_no) +
                                          ": row width != classes");
                for (const auto& v : row) e.dists.p.push_back(v.get<double>());
            }
            flags |= kFlagDists;
        }
        if (j.contains("hidden")) {
            for (const auto& v : j["hidden"]) e.hidden.push_back(v.get<double>());
            flags |= kFlagHidden;
        }
        if (j.contains("sent_embed")) {
            for (const auto& v : j["sent_embed"]) e.sent.push_back(v.get<double>());
            flags |= kFlagSent;
        }
        entries.push_back(std::move(e));
    }
    if (!have_header) throw ValidationError(path + ": missing tensor header line");
    return assemble(C, m, flags, std::move(entries), corpus, path);
}

}  // namespace

bool TensorSet::is_classification() const {
    if (!has_token_dists) return false;
    for (const auto& d : token_dists)
        if (d.rows != 1) return false;
    return true;
}

void validate_tensors(const TensorSet& ts, const Corpus& corpus) {
    if (ts.num_classes < 2) throw ValidationError("class count must be >= 2");
    const std::size_t n = corpus.size();

    if (ts.has_token_dists) {
        if (ts.token_dists.size() != n) throw ValidationError("token_dists does not cover corpus");
        for (std::size_t pos = 0; pos < n; ++pos) {
            const auto& ex = corpus.examples()[pos];
            const auto& d = ts.token_dists[pos];
            if (d.cols != ts.num_classes)
                throw ValidationError("id " + std::to_string(ex.id) + ": row width != classes");
            if (d.rows == 0)
                throw ValidationError("id " + std::to_string(ex.id) + ": empty distribution");
            if (d.rows > ts.max_tokens)
                throw ValidationError("id " + std::to_string(ex.id) + ": " +
                                      std::to_string(d.rows) + " tokens exceed cap " +
                                      std::to_string(ts.max_tokens));
            // 1 x C is the classification shape; otherwise one row per token.
            if (d.rows != 1 && d.rows != ex.tokens.size())
                throw ValidationError("id " + std::to_string(ex.id) +
                                      ": shape mismatch vs corpus token count");
            for (std::size_t r = 0; r < d.rows; ++r) {
                double sum = 0.0;
                for (std::size_t c = 0; c < d.cols; ++c) {
                    const double v = d.at(r, c);
                    if (!(v >= 0.0))
                        throw ValidationError("id " + std::to_string(ex.id) +
                                              ": negative probability");
                    sum += v;
                }
                if (std::abs(sum - 1.0) > 1e-6)
                    throw ValidationError("id " + std::to_string(ex.id) + " row " +
                                          std::to_string(r) + ": row not normalized");
            }
        }
    }
    const auto check_dim = [n](const std::vector<std::vector<double>>& arr, const char* name) {
        if (arr.size() != n)
            throw ValidationError(std::string(name) + " does not cover corpus");
        const std::size_t dim = arr.empty() ? 0 : arr[0].size();
        if (dim == 0) throw ValidationError(std::string(name) + " has zero dimension");
        for (const auto& v : arr)
            if (v.size() != dim)
                throw ValidationError(std::string(name) + " has inconsistent dimensions");
    };
    if (ts.has_hidden) check_dim(ts.hidden, "hidden");
    if (ts.has_sent_embed) check_dim(ts.sent_embed, "sent_embed");
}

TensorSet load_tensors(const std::string& path, const Corpus& corpus) {
    const std::string buf = read_file(path);
    if (buf.size() >= 8 && std::memcmp(buf.data(), kMagic, 8) == 0)
        return load_binary(buf, corpus, path);
    return load_text(buf, corpus, path);
}

void save_tensors(const TensorSet& ts, const Corpus& corpus, const std::string& path,
                  bool binary) {
    validate_tensors(ts, corpus);
    const std::size_t n = corpus.size();

    if (!binary) {
        std::string out;
        json header;
        header["classes"] = ts.num_classes;
        header["max_tokens"] = ts.max_tokens;
        out += header.dump();
        out += '\n';
        for (std::size_t pos = 0; pos < n; ++pos) {
            json j;
            j["id"] = corpus.examples()[pos].id;
            if (ts.has_token_dists) {
                json rows = json::array();
                const auto& d = ts.token_dists[pos];
                for (std::size_t r = 0; r < d.rows; ++r)
                    rows.push_back(std::vector<double>(d.row(r), d.row(r) + d.cols));
                j["token_dists"] = rows;
            }
            if (ts.has_hidden) j["hidden"] = ts.hidden[pos];
            if (ts.has_sent_embed) j["sent_embed"] = ts.sent_embed[pos];
            out += j.dump();
            out += '\n';
        }
        write_file_atomic(path, out);
        return;
    }

    std::string out;
    out.append(kMagic, 8);
    put_u32(out, 1);  // version
    put_u32(out, ts.num_classes);
    put_u32(out, ts.max_tokens);
    put_u32(out, static_cast<std::uint32_t>(n));
    std::uint32_t flags = 0;
    if (ts.has_token_dists) flags |= kFlagDists;
    if (ts.has_hidden) flags |= kFlagHidden;
    if (ts.has_sent_embed) flags |= kFlagSent;
    put_u32(out, flags);
    put_u32(out, static_cast<std::uint32_t>(ts.hidden_dim()));
    put_u32(out, static_cast<std::uint32_t>(ts.sent_dim()));
    for (std::size_t pos = 0; pos < n; ++pos) {
        put_u32(out, static_cast<std::uint32_t>(corpus.examples()[pos].id));
        put_u32(out, ts.has_token_dists ? static_cast<std::uint32_t>(ts.token_dists[pos].rows)
                                        : 0u);
    }
    for (std::size_t pos = 0; pos < n; ++pos) {
        if (ts.has_token_dists)
            for (const double v : ts.token_dists[pos].p) put_f32(out, static_cast<float>(v));
        if (ts.has_hidden)
            for (const double v : ts.hidden[pos]) put_f32(out, static_cast<float>(v));
        if (ts.has_sent_embed)
            for (const double v : ts.sent_embed[pos]) put_f32(out, static_cast<float>(v));
    }
    write_file_atomic(path, out);
}

}  // namespace fewsel
