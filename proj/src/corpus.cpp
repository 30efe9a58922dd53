#include "fewsel/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fewsel/error.hpp"

namespace fewsel {

using nlohmann::json;

LabelKey io_label_key() { return LabelKey{}; }

Corpus Corpus::from_records(std::vector<CorpusRecord> records, bool dedupe) {
    if (records.empty()) throw ValidationError("empty corpus");

    std::sort(records.begin(), records.end(),
              [](const CorpusRecord& a, const CorpusRecord& b) { return a.id < b.id; });
    for (std::size_t i = 0; i + 1 < records.size(); ++i) {
        if (records[i].id == records[i + 1].id)
            throw ValidationError("duplicate id " + std::to_string(records[i].id));
    }
    if (records.front().id != 0 || records.back().id != records.size() - 1)
        throw ValidationError("ids must be contiguous from 0");
    for (const auto& r : records) {
        if (r.tokens.empty())
            throw ValidationError("example " + std::to_string(r.id) + ": empty token sequence");
    }

    Corpus corpus;
    std::map<std::vector<std::string>, std::size_t> seen;
    for (auto& r : records) {
        auto [it, fresh] = seen.emplace(r.tokens, r.id);
        if (!fresh) {
            corpus.duplicate_ids_.push_back(r.id);
            if (dedupe) {
                ++corpus.duplicates_removed_;
                continue;
            }
        }
        corpus.id_to_pos_.emplace(r.id, corpus.examples_.size());
        corpus.examples_.push_back(Example{r.id, std::move(r.tokens), std::move(r.text)});
        corpus.labels_.push_back(r.label);
        if (r.label) corpus.has_labels_ = true;
    }

    std::set<std::string> vocab;
    for (const auto& ex : corpus.examples_) vocab.insert(ex.tokens.begin(), ex.tokens.end());
    corpus.vocab_.assign(vocab.begin(), vocab.end());
    return corpus;
}

std::optional<std::size_t> Corpus::position_of(std::size_t id) const {
    const auto it = id_to_pos_.find(id);
    if (it == id_to_pos_.end()) return std::nullopt;
    return it->second;
}

std::optional<int> Corpus::label(std::size_t id, LabelKey) const {
    label_reads_->fetch_add(1);
    const auto pos = position_of(id);
    if (!pos) throw ValidationError("unknown id " + std::to_string(id));
    return labels_[*pos];
}

namespace {

CorpusRecord parse_record(const json& j, std::size_t line_no) {
    const auto fail = [line_no](const std::string& what) -> ValidationError {
        return ValidationError("line " + std::to_string(line_no) + ": malformed record (" +
                               what + ")");
    };
    if (!j.is_object()) throw fail("not an object");
    if (!j.contains("id") || !j["id"].is_number_integer() || j["id"].get<long long>() < 0)
        throw fail("missing or invalid id");
    if (!j.contains("tokens") || !j["tokens"].is_array()) throw fail("missing tokens array");

    CorpusRecord rec;
    rec.id = j["id"].get<std::size_t>();
    for (const auto& t : j["tokens"]) {
        if (!t.is_string()) throw fail("non-string token");
        rec.tokens.push_back(t.get<std::string>());
    }
    if (j.contains("text")) {
        if (!j["text"].is_string()) throw fail("text must be a string");
        rec.text = j["text"].get<std::string>();
    }
    if (j.contains("label")) {
        if (!j["label"].is_number_integer()) throw fail("label must be an integer");
        rec.label = j["label"].get<int>();
    }
    return rec;
}

}  // namespace

Corpus parse_corpus(const std::string& content, bool dedupe) {
    std::vector<CorpusRecord> records;
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": malformed record (" +
                                  e.what() + ")");
        }
        records.push_back(parse_record(j, line_no));
    }
    return Corpus::from_records(std::move(records), dedupe);
}

Corpus load_corpus(const std::string& path, bool dedupe) {
    return parse_corpus(read_file(path), dedupe);
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    const LabelKey key = io_label_key();
    std::string out;
    for (const auto& ex : corpus.examples()) {
        json j;
        j["id"] = ex.id;
        j["tokens"] = ex.tokens;
        if (ex.text) j["text"] = *ex.text;
        if (const auto lbl = corpus.label(ex.id, key)) j["label"] = *lbl;
        out += j.dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + path);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw Error("write failed: " + path);
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("rename failed: " + path + " (" + ec.message() + ")");
    }
}

}  // namespace fewsel
