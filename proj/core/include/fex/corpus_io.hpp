#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "fex/corpus.hpp"

namespace fex {

inline constexpr int kCorpusFormatVersion = 1;

/// Text serialization of a corpus. Layout:
///
///   FEXC <version>
///   weighting <raw|tfidf|lognorm>
///   keyword-filter <0|1>
///   include-headers <0|1>
///   fingerprint <hex>
///   files <n>              then n lines: <hash> <path>
///   documents <n>          then n lines: <id> <kind> <file-index> <first> <last> <nranges> <a-b>... <name>
///   terms <n>              then n lines: <term> <df> <nloc> <file:line:col:ctx>...
///   tdm <n>                then n lines: <term-index> <doc-index> <weight>
///   reduction none | reduction <k> <terms> <docs>
///                          then: sigma line, <terms> rows of U, <docs> rows of V
///   end
void write_corpus(std::ostream& out, const Corpus& corpus);
std::string serialize_corpus(const Corpus& corpus);

/// Throws a data error for wrong magic ("not a corpus file"), unsupported
/// versions, truncation and malformed sections.
Corpus parse_corpus(std::string_view text);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace fex
