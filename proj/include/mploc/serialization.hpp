#pragma once

// JSON/CSV forms of disorder samples, predicate verdicts, operators and
// spectra, plus the table writers used by run directories.

#include <json.hpp>
#include <ostream>
#include <string>

#include "mploc/experiments.hpp"

namespace mploc {

/// {"region": {"lo", "hi"}, "seed", "sample_index", "density": {...},
///  "amplitudes": [...]} with amplitudes in region index order.
Json disorder_to_json(const DisorderSample& s);
DisorderSample disorder_from_json(const Json& j);

/// One line per verdict: kind, cube, scale, energy, witness values, stride.
Json verdict_to_json(const PredicateVerdict& v);
void write_verdict_line(std::ostream& os, const PredicateVerdict& v);

/// Sparse matrix as CSV rows "row,col,value" (upper and lower parts).
void write_operator_csv(std::ostream& os, const DiscretizedOperator& op);
/// Grid metadata, potential and nonzeros.
Json operator_to_json(const DiscretizedOperator& op);
/// Eigenvalues (and eigenvectors as columns when present).
Json spectrum_to_json(const SpectralData& s);

/// Flattens nested values into "a.b.c" keys; arrays are indexed.
void flatten(const Json& value, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out);
/// Two-column CSV "key,value".
void write_summary_csv(std::ostream& os, const Json& values);
/// Tab-separated table with a header line.
void write_series_tsv(std::ostream& os, const SeriesTable& t);

/// Shortest text that reads back as the same double ("nan", "inf", "-inf" for
/// non-finite values).
std::string format_double(double v);

}  // namespace mploc
