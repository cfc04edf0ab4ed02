#pragma once

// CSV ingestion and serialization for the three dataset shapes:
//
//   counts.csv   citation,author,outcomes,predictors,covariates,lags[,space1,space2,space3]
//   pvalues.csv  citation,author,endpoint,p,direction_negative
//   effects.csv  label,rr,ci_low,ci_high[,level]
//
// Comma separated, UTF-8, header row first, no quoting. Lines starting with
// '#' carry provenance and are skipped, as are blank lines. A p cell of the
// form "<0.001" loads as 0.001 with the truncated flag set.

#include "metaaudit/diagnostics.hpp"
#include "metaaudit/search_space.hpp"
#include "metaaudit/stat_core.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace metaaudit {

/// One counts row plus any search-space columns printed alongside it.
struct CountsRow {
    StudyCounts counts;
    std::optional<SearchSpace> printed;
    std::size_t line = 0;
};

/// Full counts table. Rows are validated (compute_space must succeed);
/// printed space columns are kept only for cross-checking.
std::vector<CountsRow> load_counts_table(const std::filesystem::path& path);
std::vector<StudyCounts> load_counts(const std::filesystem::path& path);
std::vector<PValueRecord> load_pvalues(const std::filesystem::path& path);
std::vector<EffectEstimate> load_effects(const std::filesystem::path& path);

/// Same parsers over in-memory text; `source` names the input in errors.
std::vector<CountsRow> parse_counts(std::istream& in, const std::string& source);
std::vector<PValueRecord> parse_pvalues(std::istream& in, const std::string& source);
std::vector<EffectEstimate> parse_effects(std::istream& in, const std::string& source);

/// Serializers emit the canonical header; numbers use the shortest
/// round-trip representation. `comment` lines are prefixed with "# ".
std::string write_counts_csv(const std::vector<StudyCounts>& rows, const std::string& comment = {});
std::string write_pvalues_csv(const std::vector<PValueRecord>& rows,
                              const std::string& comment = {});
std::string write_effects_csv(const std::vector<EffectEstimate>& rows,
                              const std::string& comment = {});

struct Dataset {
    std::vector<StudyCounts> counts;
    std::vector<PValueRecord> pvalues;
    std::vector<EffectEstimate> effects;
    std::string provenance;
};

/// Loads whichever paths are given and checks the cross-row invariants
/// (unique citation in counts, unique (citation, endpoint) in pvalues).
Dataset load_dataset(const std::optional<std::filesystem::path>& counts,
                     const std::optional<std::filesystem::path>& pvalues,
                     const std::optional<std::filesystem::path>& effects);

/// Directory holding the bundled table1.csv / table2.csv / table4.csv.
std::filesystem::path default_fixture_dir();

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Fixed-point text with `digits` decimals.
std::string format_fixed(double v, int digits);

}  // namespace metaaudit
