#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace fewsel {

// One unlabeled example as selection strategies see it. Labels are kept out
// of this struct entirely; they live in a gated store on the Corpus.
struct Example {
    std::size_t id = 0;
    std::vector<std::string> tokens;
    std::optional<std::string> text;
};

// Raw file record. For pair tasks the text field is the hypothesis and
// premise joined with a single "-" separator; the loader takes it verbatim.
struct CorpusRecord {
    std::size_t id = 0;
    std::vector<std::string> tokens;
    std::optional<std::string> text;
    std::optional<int> label;
};

class Corpus;

// Passkey gating label access. Only the harness (which reveals labels of
// selected examples for retraining) and the corpus writer can mint one;
// every read is counted so tests can audit that selection stayed
// label-oblivious.
class LabelKey {
    LabelKey() = default;
    friend LabelKey harness_label_key();  // defined in harness.cpp
    friend LabelKey io_label_key();       // defined in corpus.cpp
};

class Corpus {
public:
    // Validates and builds: ids unique and contiguous from 0, token
    // sequences non-empty. With dedupe, later examples whose token sequence
    // repeats an earlier one are dropped (the survivors keep their original
    // ids, so gaps may remain). Without dedupe the duplicates are only
    // flagged.
    static Corpus from_records(std::vector<CorpusRecord> records, bool dedupe);

    Corpus(Corpus&&) noexcept = default;
    Corpus& operator=(Corpus&&) noexcept = default;
    Corpus(const Corpus&) = delete;
    Corpus& operator=(const Corpus&) = delete;

    const std::vector<Example>& examples() const { return examples_; }
    std::size_t size() const { return examples_.size(); }

    // Distinct tokens across all examples, byte-sorted.
    const std::vector<std::string>& vocab() const { return vocab_; }

    std::size_t duplicates_removed() const { return duplicates_removed_; }
    const std::vector<std::size_t>& duplicate_ids() const { return duplicate_ids_; }

    // Position of an example id in examples(); contiguous corpora are the
    // identity map, deduped ones are not.
    std::optional<std::size_t> position_of(std::size_t id) const;

    bool has_labels() const { return has_labels_; }

    // Gated label access; bumps the audit counter.
    std::optional<int> label(std::size_t id, LabelKey) const;
    std::uint64_t label_reads() const { return label_reads_->load(); }

private:
    Corpus() = default;

    std::vector<Example> examples_;
    std::vector<std::optional<int>> labels_;  // aligned with examples_
    bool has_labels_ = false;
    std::vector<std::string> vocab_;
    std::unordered_map<std::size_t, std::size_t> id_to_pos_;
    std::size_t duplicates_removed_ = 0;
    std::vector<std::size_t> duplicate_ids_;
    std::unique_ptr<std::atomic<std::uint64_t>> label_reads_ =
        std::make_unique<std::atomic<std::uint64_t>>(0);
};

// Line-delimited JSON records, one example per line:
//   {"id": 0, "tokens": ["a", "b"], "text": "...", "label": 1}
// text and label optional. Errors carry 1-based line numbers.
Corpus load_corpus(const std::string& path, bool dedupe = false);
Corpus parse_corpus(const std::string& content, bool dedupe = false);

// Writes the same record format back, id-ascending, one line per example.
void save_corpus(const Corpus& corpus, const std::string& path);

// Write-to-temp + atomic rename; no partial files on error.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace fewsel
