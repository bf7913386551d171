#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace commgraph {

/// A word token; begin/end are UTF-8 byte offsets into the source text.
struct Token {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Words of `text` per Unicode default word boundaries (UAX #29, root
/// locale). Punctuation and whitespace segments are dropped.
std::vector<Token> tokenize(std::string_view text);

/// Unicode default case folding of UTF-8 text.
std::string foldCase(std::string_view text);

/// Convenience: token texts, optionally case folded.
std::vector<std::string> words(std::string_view text, bool caseFold = false);

} // namespace commgraph
