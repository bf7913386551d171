#include "commgraph/tokenize.hpp"

#include "commgraph/common.hpp"

#include <unicode/brkiter.h>
#include <unicode/unistr.h>
#include <unicode/utext.h>

#include <memory>

namespace commgraph {

namespace {

// BreakIterator instances are not thread safe; each thread clones its own.
icu::BreakIterator& wordIterator() {
    static const std::unique_ptr<icu::BreakIterator> prototype = [] {
        UErrorCode status = U_ZERO_ERROR;
        std::unique_ptr<icu::BreakIterator> it(icu::BreakIterator::createWordInstance(icu::Locale::getRoot(), status));
        if (U_FAILURE(status)) throw Error(std::string("ICU word break iterator: ") + u_errorName(status));
        return it;
    }();
    thread_local std::unique_ptr<icu::BreakIterator> local(prototype->clone());
    return *local;
}

} // namespace

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    if (text.empty()) return tokens;

    UErrorCode status = U_ZERO_ERROR;
    UText* ut = utext_openUTF8(nullptr, text.data(), static_cast<int64_t>(text.size()), &status);
    if (U_FAILURE(status)) throw Error(std::string("ICU utext: ") + u_errorName(status));

    icu::BreakIterator& it = wordIterator();
    it.setText(ut, status);
    if (U_FAILURE(status)) {
        utext_close(ut);
        throw Error(std::string("ICU setText: ") + u_errorName(status));
    }
    // With UTF-8 UText, boundaries are native byte offsets.
    int32_t begin = it.first();
    for (int32_t end = it.next(); end != icu::BreakIterator::DONE; begin = end, end = it.next()) {
        if (it.getRuleStatus() != UBRK_WORD_NONE) {
            tokens.push_back({static_cast<std::size_t>(begin), static_cast<std::size_t>(end)});
        }
    }
    // Detach from the UText before closing it.
    icu::UnicodeString empty;
    it.setText(empty);
    utext_close(ut);
    return tokens;
}

std::string foldCase(std::string_view text) {
    bool ascii = true;
    for (unsigned char c : text) {
        if (c >= 0x80) {
            ascii = false;
            break;
        }
    }
    std::string out;
    if (ascii) {
        out.reserve(text.size());
        for (unsigned char c : text) out.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c));
        return out;
    }
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    u.foldCase();
    u.toUTF8String(out);
    return out;
}

std::vector<std::string> words(std::string_view text, bool caseFold) {
    std::vector<std::string> out;
    for (const Token& t : tokenize(text)) {
        std::string_view w = text.substr(t.begin, t.end - t.begin);
        out.push_back(caseFold ? foldCase(w) : std::string(w));
    }
    return out;
}

} // namespace commgraph
