#include "snap/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "snap/errors.hpp"

namespace snap {

namespace {

constexpr std::size_t kMaxWordChars = 100; // longer words map straight to [UNK]

bool is_ascii_punct(unsigned char c) {
    return std::ispunct(c) != 0;
}

// splits one whitespace-delimited chunk at ASCII punctuation; multi-byte
// UTF-8 sequences stay inside their word
std::vector<std::string> split_punctuation(const std::string& word) {
    std::vector<std::string> out;
    std::string current;
    for (unsigned char c : word) {
        if (c < 0x80 && is_ascii_punct(c)) {
            if (!current.empty()) out.push_back(std::move(current));
            current.clear();
            out.push_back(std::string(1, static_cast<char>(c)));
        } else {
            current += static_cast<char>(c);
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

} // namespace

WordPieceTokenizer WordPieceTokenizer::from_vocab_file(const std::filesystem::path& path,
                                                       bool lower_case) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open vocabulary file: " + path.string());
    std::vector<std::string> vocab;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        vocab.push_back(line);
    }
    while (!vocab.empty() && vocab.back().empty()) vocab.pop_back();
    return from_vocab(std::move(vocab), lower_case);
}

WordPieceTokenizer WordPieceTokenizer::from_vocab(std::vector<std::string> vocab, bool lower_case) {
    WordPieceTokenizer tok;
    tok.vocab_ = std::move(vocab);
    tok.lower_case_ = lower_case;
    for (std::size_t i = 0; i < tok.vocab_.size(); ++i)
        tok.index_.emplace(tok.vocab_[i], static_cast<int>(i));
    if (tok.index_.size() != tok.vocab_.size())
        throw DataError("vocabulary has duplicate tokens");
    tok.pad_id_ = tok.token_id("[PAD]");
    tok.unk_id_ = tok.token_id("[UNK]");
    tok.cls_id_ = tok.token_id("[CLS]");
    tok.sep_id_ = tok.token_id("[SEP]");
    if (tok.unk_id_ < 0 || tok.cls_id_ < 0 || tok.sep_id_ < 0)
        throw DataError("vocabulary is missing the [UNK], [CLS] or [SEP] tokens");
    return tok;
}

int WordPieceTokenizer::token_id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? -1 : it->second;
}

std::vector<std::string> WordPieceTokenizer::basic_tokenize(const std::string& text) const {
    std::vector<std::string> out;
    std::string chunk;
    auto flush = [&] {
        if (chunk.empty()) return;
        for (auto& piece : split_punctuation(chunk)) out.push_back(std::move(piece));
        chunk.clear();
    };
    for (unsigned char c : text) {
        if (c < 0x80 && std::isspace(c)) {
            flush();
            continue;
        }
        if (c < 0x80 && lower_case_) chunk += static_cast<char>(std::tolower(c));
        else chunk += static_cast<char>(c);
    }
    flush();
    return out;
}

std::vector<std::string> WordPieceTokenizer::wordpiece_tokenize(const std::string& text) const {
    std::vector<std::string> out;
    for (const auto& word : basic_tokenize(text)) {
        if (word.size() > kMaxWordChars) {
            out.push_back("[UNK]");
            continue;
        }
        std::vector<std::string> pieces;
        std::size_t start = 0;
        bool ok = true;
        while (start < word.size()) {
            std::size_t end = word.size();
            std::string found;
            while (end > start) {
                std::string candidate =
                    (start == 0 ? "" : "##") + word.substr(start, end - start);
                if (index_.count(candidate)) {
                    found = std::move(candidate);
                    break;
                }
                --end;
            }
            if (found.empty()) {
                ok = false;
                break;
            }
            pieces.push_back(std::move(found));
            start = end;
        }
        if (ok)
            for (auto& piece : pieces) out.push_back(std::move(piece));
        else
            out.push_back("[UNK]");
    }
    return out;
}

std::vector<int> WordPieceTokenizer::encode(const std::string& text, int max_tokens) const {
    if (max_tokens < 3) throw ConfigError("token budget must fit [CLS], [SEP] and content");
    auto pieces = wordpiece_tokenize(text);
    const std::size_t budget = static_cast<std::size_t>(max_tokens) - 2;
    if (pieces.size() > budget)
        pieces.erase(pieces.begin(), pieces.end() - static_cast<std::ptrdiff_t>(budget));

    std::vector<int> ids;
    ids.reserve(pieces.size() + 2);
    ids.push_back(cls_id_);
    for (const auto& piece : pieces) {
        int id = token_id(piece);
        ids.push_back(id < 0 ? unk_id_ : id);
    }
    ids.push_back(sep_id_);
    return ids;
}

} // namespace snap
