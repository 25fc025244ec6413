#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace snap {

// WordPiece tokenizer compatible with BERT vocab.txt files: basic
// whitespace/punctuation splitting, optional ASCII lowercasing, then greedy
// longest-match subword lookup with "##" continuations.
class WordPieceTokenizer {
public:
    static WordPieceTokenizer from_vocab_file(const std::filesystem::path& path, bool lower_case);
    static WordPieceTokenizer from_vocab(std::vector<std::string> vocab, bool lower_case);

    // splits into word-level tokens before subword lookup
    std::vector<std::string> basic_tokenize(const std::string& text) const;
    std::vector<std::string> wordpiece_tokenize(const std::string& text) const;

    // [CLS] ... [SEP] ids; sequences over max_tokens are truncated from the
    // front so the most recent part of the story survives
    std::vector<int> encode(const std::string& text, int max_tokens) const;

    int vocab_size() const { return static_cast<int>(vocab_.size()); }
    int token_id(const std::string& token) const; // -1 when absent
    const std::vector<std::string>& vocabulary() const { return vocab_; }
    bool lower_case() const { return lower_case_; }

    int pad_id() const { return pad_id_; }
    int unk_id() const { return unk_id_; }
    int cls_id() const { return cls_id_; }
    int sep_id() const { return sep_id_; }

private:
    std::vector<std::string> vocab_;
    std::unordered_map<std::string, int> index_;
    bool lower_case_ = false;
    int pad_id_ = -1, unk_id_ = -1, cls_id_ = -1, sep_id_ = -1;
};

} // namespace snap
