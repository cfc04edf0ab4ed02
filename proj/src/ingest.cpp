#include "metaaudit/ingest.hpp"

#include "metaaudit/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>
#include <utility>

#ifndef METAAUDIT_FIXTURE_DIR
#define METAAUDIT_FIXTURE_DIR "data/fixtures"
#endif

namespace metaaudit {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.emplace_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

// Reads the table body line by line, tracking 1-based file line numbers.
class CsvReader {
public:
    CsvReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    // Returns false at end of input.
    bool next(std::vector<std::string>& fields) {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++line_;
            std::string_view sv(raw);
            if (line_ == 1 && sv.starts_with("\xEF\xBB\xBF")) sv.remove_prefix(3);
            sv = trim(sv);
            if (sv.empty() || sv.front() == '#') continue;
            fields = split(sv);
            return true;
        }
        return false;
    }

    std::size_t line() const { return line_; }
    const std::string& source() const { return source_; }

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        throw ValidationError(source_ + ": row " + std::to_string(line_) + ", field '" + field +
                              "': " + what);
    }

private:
    std::istream& in_;
    std::string source_;
    std::size_t line_ = 0;
};

// Header must start with `required`; up to `optional` trailing columns may follow.
std::vector<std::string> read_header(CsvReader& r, const std::vector<std::string>& required,
                                     const std::vector<std::string>& optional,
                                     bool& header_seen) {
    std::vector<std::string> header;
    header_seen = r.next(header);
    if (!header_seen) return header;
    const auto schema_text = [&] {
        std::string s;
        for (const auto& c : required) s += (s.empty() ? "" : ",") + c;
        for (const auto& c : optional) s += ",[" + c + "]";
        return s;
    };
    bool ok = header.size() >= required.size() &&
              header.size() <= required.size() + optional.size();
    for (std::size_t i = 0; ok && i < header.size(); ++i) {
        const auto& want = i < required.size() ? required[i] : optional[i - required.size()];
        ok = header[i] == want;
    }
    if (!ok) {
        throw ValidationError(r.source() + ": row " + std::to_string(r.line()) +
                              ": header does not match schema " + schema_text());
    }
    return header;
}

template <typename Int>
Int parse_int(const CsvReader& r, const std::string& field, const std::string& cell) {
    Int v{};
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
    if (cell.empty() || ec != std::errc() || ptr != end) r.fail(field, "expected an integer, got '" + cell + "'");
    return v;
}

double parse_real(const CsvReader& r, const std::string& field, const std::string& cell) {
    double v = 0.0;
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
    if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        r.fail(field, "expected a number, got '" + cell + "'");
    }
    return v;
}

bool parse_bool(const CsvReader& r, const std::string& field, const std::string& cell) {
    if (cell == "1" || cell == "true" || cell == "TRUE" || cell == "yes") return true;
    if (cell == "0" || cell == "false" || cell == "FALSE" || cell == "no" || cell.empty()) {
        return false;
    }
    r.fail(field, "expected 0/1 or true/false, got '" + cell + "'");
}

void check_width(const CsvReader& r, const std::vector<std::string>& fields, std::size_t width) {
    if (fields.size() != width) {
        throw ValidationError(r.source() + ": row " + std::to_string(r.line()) + ": expected " +
                              std::to_string(width) + " fields, got " +
                              std::to_string(fields.size()));
    }
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

void put_comment(std::ostringstream& out, const std::string& comment) {
    if (comment.empty()) return;
    std::istringstream lines(comment);
    std::string line;
    while (std::getline(lines, line)) out << "# " << line << '\n';
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string format_fixed(double v, int digits) {
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    char buf[512];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
    if (ec != std::errc()) return format_double(v);
    return std::string(buf, ptr);
}

std::vector<CountsRow> parse_counts(std::istream& in, const std::string& source) {
    CsvReader r(in, source);
    bool seen = false;
    const auto header = read_header(
        r, {"citation", "author", "outcomes", "predictors", "covariates", "lags"},
        {"space1", "space2", "space3"}, seen);
    std::vector<CountsRow> rows;
    if (!seen) return rows;
    if (header.size() != 6 && header.size() != 9) {
        throw ValidationError(source + ": space columns must be all present or all absent");
    }
    std::set<std::int64_t> citations;
    std::vector<std::string> f;
    while (r.next(f)) {
        check_width(r, f, header.size());
        CountsRow row;
        row.line = r.line();
        auto& c = row.counts;
        c.citation = parse_int<std::int64_t>(r, "citation", f[0]);
        c.author = f[1];
        c.outcomes = parse_int<std::int64_t>(r, "outcomes", f[2]);
        c.predictors = parse_int<std::int64_t>(r, "predictors", f[3]);
        c.covariates = parse_int<std::int64_t>(r, "covariates", f[4]);
        c.lags = parse_int<std::int64_t>(r, "lags", f[5]);
        try {
            compute_space(c);
        } catch (const OverflowError& e) {
            throw OverflowError(source + ": row " + std::to_string(r.line()) + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(source + ": row " + std::to_string(r.line()) + ": " + e.what());
        }
        if (!citations.insert(c.citation).second) {
            r.fail("citation", "duplicate citation " + std::to_string(c.citation));
        }
        if (header.size() == 9) {
            row.printed = SearchSpace{parse_int<std::uint64_t>(r, "space1", f[6]),
                                      parse_int<std::uint64_t>(r, "space2", f[7]),
                                      parse_int<std::uint64_t>(r, "space3", f[8])};
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<PValueRecord> parse_pvalues(std::istream& in, const std::string& source) {
    CsvReader r(in, source);
    bool seen = false;
    read_header(r, {"citation", "author", "endpoint", "p", "direction_negative"}, {}, seen);
    std::vector<PValueRecord> rows;
    if (!seen) return rows;
    std::set<std::pair<std::int64_t, std::string>> keys;
    std::vector<std::string> f;
    while (r.next(f)) {
        check_width(r, f, 5);
        if (f[3].empty()) continue;  // blank cell: nothing reported
        PValueRecord rec;
        rec.citation = parse_int<std::int64_t>(r, "citation", f[0]);
        rec.author = f[1];
        rec.endpoint = f[2];
        if (rec.endpoint.empty()) r.fail("endpoint", "empty endpoint");
        std::string cell = f[3];
        if (cell.starts_with('<')) {
            rec.truncated = true;
            cell = std::string(trim(std::string_view(cell).substr(1)));
        }
        rec.p = parse_real(r, "p", cell);
        if (!(rec.p > 0.0 && rec.p <= 1.0)) r.fail("p", "p-value must lie in (0,1], got " + f[3]);
        rec.direction_negative = parse_bool(r, "direction_negative", f[4]);
        if (!keys.emplace(rec.citation, rec.endpoint).second) {
            r.fail("endpoint", "duplicate (citation, endpoint) pair");
        }
        rows.push_back(std::move(rec));
    }
    return rows;
}

std::vector<EffectEstimate> parse_effects(std::istream& in, const std::string& source) {
    CsvReader r(in, source);
    bool seen = false;
    const auto header = read_header(r, {"label", "rr", "ci_low", "ci_high"}, {"level"}, seen);
    std::vector<EffectEstimate> rows;
    if (!seen) return rows;
    std::vector<std::string> f;
    while (r.next(f)) {
        check_width(r, f, header.size());
        EffectEstimate e;
        e.label = f[0];
        e.rr = parse_real(r, "rr", f[1]);
        e.ci_low = parse_real(r, "ci_low", f[2]);
        e.ci_high = parse_real(r, "ci_high", f[3]);
        if (header.size() == 5 && !f[4].empty()) e.level = parse_real(r, "level", f[4]);
        if (e.rr <= 0.0) r.fail("rr", "must be positive");
        if (e.ci_low <= 0.0) r.fail("ci_low", "must be positive");
        if (e.ci_high <= 0.0) r.fail("ci_high", "must be positive");
        if (!(e.level > 0.0 && e.level < 1.0)) r.fail("level", "must lie in (0,1)");
        if (e.ci_low > e.rr) r.fail("ci_low", "exceeds rr");
        if (e.rr > e.ci_high) r.fail("ci_high", "is below rr");
        rows.push_back(std::move(e));
    }
    return rows;
}

std::vector<CountsRow> load_counts_table(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_counts(in, path.string());
}

std::vector<StudyCounts> load_counts(const std::filesystem::path& path) {
    std::vector<StudyCounts> out;
    for (auto& row : load_counts_table(path)) out.push_back(std::move(row.counts));
    return out;
}

std::vector<PValueRecord> load_pvalues(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_pvalues(in, path.string());
}

std::vector<EffectEstimate> load_effects(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_effects(in, path.string());
}

std::string write_counts_csv(const std::vector<StudyCounts>& rows, const std::string& comment) {
    std::ostringstream out;
    put_comment(out, comment);
    out << "citation,author,outcomes,predictors,covariates,lags\n";
    for (const auto& c : rows) {
        out << c.citation << ',' << c.author << ',' << c.outcomes << ',' << c.predictors << ','
            << c.covariates << ',' << c.lags << '\n';
    }
    return out.str();
}

std::string write_pvalues_csv(const std::vector<PValueRecord>& rows, const std::string& comment) {
    std::ostringstream out;
    put_comment(out, comment);
    out << "citation,author,endpoint,p,direction_negative\n";
    for (const auto& r : rows) {
        out << r.citation << ',' << r.author << ',' << r.endpoint << ','
            << (r.truncated ? "<" : "") << format_double(r.p) << ','
            << (r.direction_negative ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string write_effects_csv(const std::vector<EffectEstimate>& rows, const std::string& comment) {
    std::ostringstream out;
    put_comment(out, comment);
    out << "label,rr,ci_low,ci_high,level\n";
    for (const auto& e : rows) {
        out << e.label << ',' << format_double(e.rr) << ',' << format_double(e.ci_low) << ','
            << format_double(e.ci_high) << ',' << format_double(e.level) << '\n';
    }
    return out.str();
}

Dataset load_dataset(const std::optional<std::filesystem::path>& counts,
                     const std::optional<std::filesystem::path>& pvalues,
                     const std::optional<std::filesystem::path>& effects) {
    Dataset d;
    std::ostringstream prov;
    if (counts) {
        d.counts = load_counts(*counts);
        prov << counts->string() << " (" << d.counts.size() << " rows)\n";
    }
    if (pvalues) {
        d.pvalues = load_pvalues(*pvalues);
        prov << pvalues->string() << " (" << d.pvalues.size() << " rows)\n";
    }
    if (effects) {
        d.effects = load_effects(*effects);
        prov << effects->string() << " (" << d.effects.size() << " rows)\n";
    }
    d.provenance = prov.str();
    return d;
}

std::filesystem::path default_fixture_dir() { return METAAUDIT_FIXTURE_DIR; }

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory '" + path.parent_path().string() +
                          "': " + ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out.flush()) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace metaaudit
