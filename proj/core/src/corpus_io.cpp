#include "fex/corpus_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fex {
namespace {

std::string fmt_double(double v, int digits) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

char context_char(lex::Context c) { return lex::context_code(c); }

lex::Context parse_context(char c, int line) {
    switch (c) {
        case 'i': return lex::Context::identifier;
        case 'c': return lex::Context::comment;
        case 'm': return lex::Context::macro;
        default: break;
    }
    throw data_error("corrupt corpus file: line " + std::to_string(line) + ": unknown context '" +
                     std::string(1, c) + "'");
}

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    bool at_end() const { return pos_ >= text_.size(); }
    int line_number() const { return line_; }

    std::string_view next_line() {
        if (at_end()) throw data_error("truncated corpus file after line " + std::to_string(line_));
        std::size_t end = text_.find('\n', pos_);
        unterminated_ = end == std::string_view::npos;
        if (unterminated_) end = text_.size();
        std::string_view line = text_.substr(pos_, end - pos_);
        pos_ = end + 1;
        ++line_;
        return line;
    }

    // The writer terminates every line, so a bad unterminated line is a cut.
    [[noreturn]] void fail(const std::string& what) const {
        if (unterminated_) throw data_error("truncated corpus file at line " + std::to_string(line_));
        throw data_error("corrupt corpus file: line " + std::to_string(line_) + ": " + what);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 0;
    bool unterminated_ = false;
};

// Splits on single spaces; `max_fields` > 0 keeps the remainder in the last field.
std::vector<std::string_view> fields(std::string_view line, std::size_t max_fields = 0) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        if (max_fields && out.size() + 1 == max_fields) {
            out.push_back(line.substr(pos));
            break;
        }
        std::size_t sp = line.find(' ', pos);
        if (sp == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, sp - pos));
        pos = sp + 1;
    }
    return out;
}

template <typename T>
T parse_int(std::string_view s, const Reader& r) {
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) r.fail("expected integer, got '" + std::string(s) + "'");
    return value;
}

double parse_real(std::string_view s, const Reader& r) {
    std::string copy(s);
    char* end = nullptr;
    const double v = std::strtod(copy.c_str(), &end);
    if (copy.empty() || end != copy.c_str() + copy.size()) r.fail("expected number, got '" + copy + "'");
    return v;
}

std::string_view keyed(Reader& r, std::string_view key) {
    const auto line = r.next_line();
    if (line.substr(0, key.size()) != key || line.size() <= key.size() || line[key.size()] != ' ')
        r.fail("expected '" + std::string(key) + "'");
    return line.substr(key.size() + 1);
}

bool parse_flag(std::string_view s, const Reader& r) {
    if (s == "1") return true;
    if (s == "0") return false;
    r.fail("expected 0 or 1");
}

void read_matrix_rows(Reader& r, DenseMatrix& m) {
    for (std::size_t i = 0; i < m.rows; ++i) {
        const auto f = fields(r.next_line());
        if (f.size() != m.cols) r.fail("matrix row has wrong width");
        for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = parse_real(f[j], r);
    }
}

}  // namespace

void write_corpus(std::ostream& out, const Corpus& c) {
    out << "FEXC " << kCorpusFormatVersion << '\n';
    out << "weighting " << to_string(c.weighting) << '\n';
    out << "keyword-filter " << (c.keyword_filter ? 1 : 0) << '\n';
    out << "include-headers " << (c.include_headers ? 1 : 0) << '\n';
    out << "fingerprint " << c.fingerprint << '\n';

    out << "files " << c.files.size() << '\n';
    for (const auto& f : c.files) out << f.hash << ' ' << f.path << '\n';

    out << "documents " << c.documents.size() << '\n';
    for (const auto& d : c.documents) {
        std::size_t file_index = 0;
        while (file_index < c.files.size() && c.files[file_index].path != d.file) ++file_index;
        out << d.id << ' ' << (d.kind == DocumentKind::function ? "function" : "declarations") << ' '
            << file_index << ' ' << d.span.first << ' ' << d.span.last << ' ' << d.ranges.size();
        for (const auto& r : d.ranges) out << ' ' << r.first << '-' << r.last;
        out << ' ' << d.name << '\n';
    }

    out << "terms " << c.terms.size() << '\n';
    for (const auto& t : c.terms) {
        out << t.term << ' ' << t.df << ' ' << t.locations.size();
        for (const auto& l : t.locations)
            out << ' ' << l.file << ':' << l.line << ':' << l.column << ':' << context_char(l.context);
        out << '\n';
    }

    out << "tdm " << c.tdm.size() << '\n';
    for (const auto& e : c.tdm) out << e.term << ' ' << e.doc << ' ' << fmt_double(e.weight, 9) << '\n';

    if (!c.reduction) {
        out << "reduction none\n";
    } else {
        const auto& red = *c.reduction;
        out << "reduction " << red.rank << ' ' << red.u.rows << ' ' << red.v.rows << '\n';
        out << "sigma";
        for (double s : red.sigma) out << ' ' << fmt_double(s, 17);
        out << '\n';
        for (const DenseMatrix* m : {&red.u, &red.v}) {
            for (std::size_t i = 0; i < m->rows; ++i) {
                for (std::size_t j = 0; j < m->cols; ++j) out << (j ? " " : "") << fmt_double((*m)(i, j), 17);
                out << '\n';
            }
        }
    }
    out << "end\n";
}

std::string serialize_corpus(const Corpus& corpus) {
    std::ostringstream out;
    write_corpus(out, corpus);
    return out.str();
}

Corpus parse_corpus(std::string_view text) {
    Reader r(text);
    if (text.substr(0, 5) != "FEXC ") throw data_error("not a corpus file");
    {
        const auto magic = fields(r.next_line());
        if (magic.size() != 2) r.fail("malformed header");
        const int version = parse_int<int>(magic[1], r);
        if (version != kCorpusFormatVersion)
            throw data_error("corpus format version " + std::to_string(version) +
                             " is not supported (this build reads version " +
                             std::to_string(kCorpusFormatVersion) + ")");
    }

    Corpus c;
    {
        const auto w = keyed(r, "weighting");
        const auto parsed = parse_weighting(w);
        if (!parsed) r.fail("unknown weighting '" + std::string(w) + "'");
        c.weighting = *parsed;
    }
    c.keyword_filter = parse_flag(keyed(r, "keyword-filter"), r);
    c.include_headers = parse_flag(keyed(r, "include-headers"), r);
    c.fingerprint = std::string(keyed(r, "fingerprint"));

    const auto n_files = parse_int<std::size_t>(keyed(r, "files"), r);
    for (std::size_t i = 0; i < n_files; ++i) {
        const auto f = fields(r.next_line(), 2);
        if (f.size() != 2 || f[1].empty()) r.fail("malformed file record");
        c.files.push_back({std::string(f[1]), std::string(f[0])});
    }

    const auto n_docs = parse_int<std::size_t>(keyed(r, "documents"), r);
    for (std::size_t i = 0; i < n_docs; ++i) {
        const auto line = r.next_line();
        const auto head = fields(line, 7);
        if (head.size() != 7) r.fail("malformed document record");
        Document d;
        d.id = parse_int<int>(head[0], r);
        if (d.id != static_cast<int>(i)) r.fail("document ids must be dense");
        if (head[1] == "function") d.kind = DocumentKind::function;
        else if (head[1] == "declarations") d.kind = DocumentKind::file_declarations;
        else r.fail("unknown document kind");
        const auto file_index = parse_int<std::size_t>(head[2], r);
        if (file_index >= c.files.size()) r.fail("document file index out of range");
        d.file = c.files[file_index].path;
        d.span = {parse_int<int>(head[3], r), parse_int<int>(head[4], r)};
        const auto n_ranges = parse_int<std::size_t>(head[5], r);
        const auto tail = fields(head[6], n_ranges + 1);
        if (tail.size() != n_ranges + 1) r.fail("malformed document ranges");
        for (std::size_t k = 0; k < n_ranges; ++k) {
            const auto dash = tail[k].find('-');
            if (dash == std::string_view::npos) r.fail("malformed range");
            d.ranges.push_back({parse_int<int>(tail[k].substr(0, dash), r),
                                parse_int<int>(tail[k].substr(dash + 1), r)});
        }
        d.name = std::string(tail[n_ranges]);
        c.documents.push_back(std::move(d));
    }

    const auto n_terms = parse_int<std::size_t>(keyed(r, "terms"), r);
    for (std::size_t i = 0; i < n_terms; ++i) {
        const auto f = fields(r.next_line());
        if (f.size() < 3) r.fail("malformed term record");
        TermEntry t;
        t.term = std::string(f[0]);
        t.df = parse_int<int>(f[1], r);
        const auto n_loc = parse_int<std::size_t>(f[2], r);
        if (f.size() != 3 + n_loc) r.fail("term location count mismatch");
        for (std::size_t k = 0; k < n_loc; ++k) {
            std::string_view loc = f[3 + k];
            Location l;
            std::size_t a = loc.find(':'), b = loc.find(':', a + 1), cpos = loc.find(':', b + 1);
            if (a == std::string_view::npos || b == std::string_view::npos || cpos == std::string_view::npos ||
                cpos + 2 != loc.size())
                r.fail("malformed location");
            l.file = parse_int<std::uint32_t>(loc.substr(0, a), r);
            l.line = parse_int<int>(loc.substr(a + 1, b - a - 1), r);
            l.column = parse_int<int>(loc.substr(b + 1, cpos - b - 1), r);
            l.context = parse_context(loc[cpos + 1], r.line_number());
            if (l.file >= c.files.size()) r.fail("location file index out of range");
            t.locations.push_back(l);
        }
        c.terms.push_back(std::move(t));
    }

    const auto n_tdm = parse_int<std::size_t>(keyed(r, "tdm"), r);
    for (std::size_t i = 0; i < n_tdm; ++i) {
        const auto f = fields(r.next_line());
        if (f.size() != 3) r.fail("malformed tdm entry");
        TdmEntry e{parse_int<std::uint32_t>(f[0], r), parse_int<std::uint32_t>(f[1], r), parse_real(f[2], r)};
        if (e.term >= c.terms.size() || e.doc >= c.documents.size()) r.fail("tdm index out of range");
        c.tdm.push_back(e);
    }

    const auto red = fields(keyed(r, "reduction"));
    if (!(red.size() == 1 && red[0] == "none")) {
        if (red.size() != 3) r.fail("malformed reduction header");
        Reduction rd;
        rd.rank = parse_int<int>(red[0], r);
        const auto rows_u = parse_int<std::size_t>(red[1], r);
        const auto rows_v = parse_int<std::size_t>(red[2], r);
        if (rd.rank <= 0 || rows_u != c.terms.size() || rows_v != c.documents.size())
            r.fail("reduction dimensions do not match the corpus");
        const auto sig = fields(keyed(r, "sigma"));
        if (sig.size() != static_cast<std::size_t>(rd.rank)) r.fail("sigma count mismatch");
        for (auto s : sig) rd.sigma.push_back(parse_real(s, r));
        rd.u = DenseMatrix(rows_u, static_cast<std::size_t>(rd.rank));
        rd.v = DenseMatrix(rows_v, static_cast<std::size_t>(rd.rank));
        read_matrix_rows(r, rd.u);
        read_matrix_rows(r, rd.v);
        c.reduction = std::move(rd);
    }
    if (r.next_line() != "end") r.fail("expected 'end'");
    return c;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write corpus file " + path.string());
    write_corpus(out, corpus);
    if (!out) throw data_error("failed writing corpus file " + path.string());
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot read corpus file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_corpus(buf.str());
}

}  // namespace fex
