#pragma once

#include "bdbc/blockstruct.hpp"
#include "bdbc/core_stats.hpp"
#include "bdbc/types.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bdbc {

struct LoadedCsv {
  DataMatrix data;
  std::optional<std::vector<std::string>> labels;
};

/// Numeric CSV. `label_column` is a header name, or a 1-based column number
/// when the file has no header. Errors name the offending cell as
/// (row, column), both 1-based over the data body.
LoadedCsv load_csv(const std::string& path, bool has_header,
                   const std::optional<std::string>& label_column = std::nullopt);
LoadedCsv parse_numeric_csv(const std::vector<std::vector<std::string>>& rows, bool has_header,
                            const std::optional<std::string>& label_column);

/// Integer codes in order of first appearance.
Labels encode_labels(const std::vector<std::string>& labels);

/// One-way ANOVA F per column. A column with zero within-group variance
/// scores +inf unless its group means are also equal, in which case 0.
Vector anova_f_scores(const Matrix& x, const Labels& labels);

/// The k columns with the largest F, kept in their original order. Ties go
/// to the lower column index.
DataMatrix anova_select_k(const DataMatrix& data, const Labels& labels, int k);

/// Lowercase, split on anything that is not an ASCII letter or digit, drop
/// tokens shorter than two characters.
std::vector<std::string> tokenize(std::string_view text);

struct Corpus {
  std::vector<std::vector<int>> documents; // term ids into `vocabulary`
  std::optional<std::vector<double>> ratings;
  std::vector<std::string> vocabulary;     // sorted
  std::vector<std::size_t> source_index;   // input position of each kept document
};

/// Documents with no tokens left are dropped. Throws InputError when nothing
/// survives.
Corpus build_corpus(const std::vector<std::string>& texts,
                    const std::optional<std::vector<double>>& ratings = std::nullopt);

/// tf(t, d) log(N / df(t)) on the `top_tf` terms with the highest mean
/// relative frequency, optionally reduced to `select_k` terms by ANOVA
/// against the corpus ratings.
DataMatrix tfidf_matrix(const Corpus& corpus, int top_tf,
                        std::optional<int> select_k = std::nullopt);

struct HeatmapCell {
  int row_cluster = 0;
  int group = 0;
  double percent = 0.0;
  std::vector<std::string> terms;
};

struct HeatmapTable {
  std::vector<HeatmapCell> cells;
  std::vector<std::string> notes; // omitted cells
};

/// For row cluster b and each column group A of its grouping: the mean value
/// of A's columns over b's rows, as a percentage of the average of that
/// quantity over all row clusters.
HeatmapTable heatmap_stat(const DataMatrix& tfidf, const Labels& row_assignment,
                          const std::vector<ColumnGrouping>& groupings);

} // namespace bdbc
