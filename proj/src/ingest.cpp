#include "bdbc/ingest.hpp"

#include "bdbc/csv.hpp"
#include "bdbc/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace bdbc {

namespace {

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  if (!s.empty() && s.front() == '+') {
    s.remove_prefix(1);
  }
  if (s.empty()) {
    return false;
  }
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

std::string cell(std::size_t r, std::size_t c) {
  return "(" + std::to_string(r + 1) + "," + std::to_string(c + 1) + ")";
}

} // namespace

LoadedCsv parse_numeric_csv(const std::vector<std::vector<std::string>>& rows, bool has_header,
                            const std::optional<std::string>& label_column) {
  if (rows.empty() || (has_header && rows.size() < 2)) {
    throw InputError("CSV has no data rows");
  }
  const std::size_t width = rows.front().size();
  std::vector<std::string> header;
  if (has_header) {
    header = rows.front();
  }
  std::optional<std::size_t> label_idx;
  if (label_column) {
    if (has_header) {
      const auto it = std::find(header.begin(), header.end(), *label_column);
      if (it == header.end()) {
        throw InputError("label column '" + *label_column + "' not found in header");
      }
      label_idx = static_cast<std::size_t>(it - header.begin());
    } else {
      int one_based = 0;
      const auto& s = *label_column;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), one_based);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size() || one_based < 1 ||
          static_cast<std::size_t>(one_based) > width) {
        throw InputError("label column '" + s + "' must be a column number in 1.." +
                         std::to_string(width) + " when the file has no header");
      }
      label_idx = static_cast<std::size_t>(one_based - 1);
    }
  }
  const std::size_t first = has_header ? 1 : 0;
  const std::size_t n = rows.size() - first;
  const std::size_t p = width - (label_idx ? 1 : 0);
  if (p == 0) {
    throw InputError("CSV has no numeric columns");
  }
  LoadedCsv out;
  out.data.values.resize(static_cast<Index>(n), static_cast<Index>(p));
  if (label_idx) {
    out.labels.emplace();
    out.labels->reserve(n);
  }
  for (std::size_t c = 0; c < width; ++c) {
    if (has_header && c != label_idx) {
      out.data.col_names.push_back(header[c]);
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = rows[first + r];
    if (row.size() != width) {
      throw InputError("ragged CSV: data row " + std::to_string(r + 1) + " has " +
                       std::to_string(row.size()) + " fields, expected " + std::to_string(width));
    }
    Index j = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_idx) {
        out.labels->push_back(row[c]);
        continue;
      }
      double v = 0.0;
      if (!parse_double(row[c], v)) {
        throw InputError("non-numeric cell '" + row[c] + "' at " + cell(r, c));
      }
      out.data.values(static_cast<Index>(r), j++) = v;
    }
  }
  return out;
}

LoadedCsv load_csv(const std::string& path, bool has_header,
                   const std::optional<std::string>& label_column) {
  return parse_numeric_csv(read_csv_file(path), has_header, label_column);
}

Labels encode_labels(const std::vector<std::string>& labels) {
  std::map<std::string, int> ids;
  Labels out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    const auto [it, inserted] = ids.try_emplace(l, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

Vector anova_f_scores(const Matrix& x, const Labels& labels) {
  const Index n = x.rows();
  if (static_cast<Index>(labels.size()) != n) {
    throw InputError("ANOVA: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " rows");
  }
  std::map<int, std::vector<Index>> groups;
  for (Index i = 0; i < n; ++i) {
    groups[labels[static_cast<std::size_t>(i)]].push_back(i);
  }
  const auto g = static_cast<Index>(groups.size());
  if (g < 2) {
    throw InputError("ANOVA needs at least two classes");
  }
  if (n <= g) {
    throw InputError("ANOVA needs more rows than classes");
  }
  Vector f(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double grand = x.col(j).mean();
    double between = 0.0;
    double within = 0.0;
    for (const auto& [label, rows] : groups) {
      double m = 0.0;
      for (Index i : rows) {
        m += x(i, j);
      }
      m /= static_cast<double>(rows.size());
      between += static_cast<double>(rows.size()) * (m - grand) * (m - grand);
      for (Index i : rows) {
        within += (x(i, j) - m) * (x(i, j) - m);
      }
    }
    const double msb = between / static_cast<double>(g - 1);
    const double msw = within / static_cast<double>(n - g);
    if (msw > 0.0) {
      f(j) = msb / msw;
    } else {
      f(j) = msb > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
  }
  return f;
}

DataMatrix anova_select_k(const DataMatrix& data, const Labels& labels, int k) {
  if (k < 1 || k > data.cols()) {
    throw InputError("select-k must be in 1.." + std::to_string(data.cols()) + ", got " +
                     std::to_string(k));
  }
  const Vector f = anova_f_scores(data.values, labels);
  std::vector<Index> order(static_cast<std::size_t>(f.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return f(a) > f(b); });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  DataMatrix out;
  out.values.resize(data.rows(), k);
  out.row_labels = data.row_labels;
  for (Index c = 0; c < k; ++c) {
    const Index j = order[static_cast<std::size_t>(c)];
    out.values.col(c) = data.values.col(j);
    if (!data.col_names.empty()) {
      out.col_names.push_back(data.col_names[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2) {
      out.push_back(cur);
    }
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      cur.push_back(static_cast<char>(c));
    } else if (c >= 'A' && c <= 'Z') {
      cur.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

Corpus build_corpus(const std::vector<std::string>& texts,
                    const std::optional<std::vector<double>>& ratings) {
  if (ratings && ratings->size() != texts.size()) {
    throw InputError("corpus has " + std::to_string(texts.size()) + " documents but " +
                     std::to_string(ratings->size()) + " ratings");
  }
  std::vector<std::vector<std::string>> tokens;
  Corpus corpus;
  std::map<std::string, int> vocab;
  for (std::size_t d = 0; d < texts.size(); ++d) {
    auto t = tokenize(texts[d]);
    if (t.empty()) {
      continue;
    }
    for (const auto& w : t) {
      vocab.try_emplace(w, 0);
    }
    tokens.push_back(std::move(t));
    corpus.source_index.push_back(d);
  }
  if (tokens.empty()) {
    throw InputError("empty vocabulary after tokenization");
  }
  int id = 0;
  for (auto& [w, v] : vocab) {
    v = id++;
    corpus.vocabulary.push_back(w);
  }
  for (const auto& t : tokens) {
    std::vector<int> doc;
    doc.reserve(t.size());
    for (const auto& w : t) {
      doc.push_back(vocab.at(w));
    }
    corpus.documents.push_back(std::move(doc));
  }
  if (ratings) {
    corpus.ratings.emplace();
    for (std::size_t d : corpus.source_index) {
      corpus.ratings->push_back((*ratings)[d]);
    }
  }
  return corpus;
}

DataMatrix tfidf_matrix(const Corpus& corpus, int top_tf, std::optional<int> select_k) {
  const auto n = static_cast<Index>(corpus.documents.size());
  const auto v = static_cast<Index>(corpus.vocabulary.size());
  if (n == 0 || v == 0) {
    throw InputError("empty corpus");
  }
  if (top_tf < 1) {
    throw InputError("top-tf must be >= 1");
  }
  Matrix tf = Matrix::Zero(n, v);
  Vector df = Vector::Zero(v);
  for (Index d = 0; d < n; ++d) {
    const auto& doc = corpus.documents[static_cast<std::size_t>(d)];
    for (int t : doc) {
      tf(d, t) += 1.0;
    }
    for (Index t = 0; t < v; ++t) {
      if (tf(d, t) > 0.0) {
        df(t) += 1.0;
      }
    }
    tf.row(d) /= static_cast<double>(doc.size());
  }
  const Vector mean_tf = tf.colwise().mean();
  std::vector<Index> order(static_cast<std::size_t>(v));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return mean_tf(a) > mean_tf(b); });
  order.resize(static_cast<std::size_t>(std::min<Index>(top_tf, v)));
  std::sort(order.begin(), order.end());

  DataMatrix out;
  out.values.resize(n, static_cast<Index>(order.size()));
  for (std::size_t c = 0; c < order.size(); ++c) {
    const Index t = order[c];
    const double idf = std::log(static_cast<double>(n) / df(t));
    out.values.col(static_cast<Index>(c)) = tf.col(t) * idf;
    out.col_names.push_back(corpus.vocabulary[static_cast<std::size_t>(t)]);
  }
  if (select_k) {
    if (!corpus.ratings) {
      throw InputError("select-k needs document ratings");
    }
    std::vector<std::string> keys;
    for (double r : *corpus.ratings) {
      keys.push_back(format_double(r));
    }
    out = anova_select_k(out, encode_labels(keys), std::min<int>(*select_k, out.cols()));
  }
  return out;
}

HeatmapTable heatmap_stat(const DataMatrix& tfidf, const Labels& row_assignment,
                          const std::vector<ColumnGrouping>& groupings) {
  const Index n = tfidf.rows();
  const Index p = tfidf.cols();
  if (static_cast<Index>(row_assignment.size()) != n) {
    throw InputError("heatmap: row assignment length does not match the matrix");
  }
  const auto g = static_cast<int>(groupings.size());
  for (const auto& gr : groupings) {
    if (gr.p() != p) {
      throw InputError("heatmap: grouping width does not match the matrix");
    }
  }
  std::vector<std::vector<Index>> rows(static_cast<std::size_t>(g));
  for (Index i = 0; i < n; ++i) {
    const int b = row_assignment[static_cast<std::size_t>(i)];
    if (b < 0 || b >= g) {
      throw InputError("heatmap: row cluster id out of range");
    }
    rows[static_cast<std::size_t>(b)].push_back(i);
  }
  auto average = [&](const std::vector<Index>& rs, const std::vector<int>& cols) {
    double s = 0.0;
    for (Index i : rs) {
      for (int j : cols) {
        s += tfidf.values(i, j);
      }
    }
    return s / static_cast<double>(rs.size() * cols.size());
  };
  HeatmapTable table;
  for (int b = 0; b < g; ++b) {
    const auto members = groupings[static_cast<std::size_t>(b)].members();
    for (int a = 0; a < static_cast<int>(members.size()); ++a) {
      const auto& cols = members[static_cast<std::size_t>(a)];
      const std::string where =
          "row cluster " + std::to_string(b) + ", group " + std::to_string(a);
      if (cols.empty()) {
        table.notes.push_back(where + ": empty column group");
        continue;
      }
      if (rows[static_cast<std::size_t>(b)].empty()) {
        table.notes.push_back(where + ": empty row cluster");
        continue;
      }
      double denom = 0.0;
      int clusters = 0;
      for (int c = 0; c < g; ++c) {
        if (!rows[static_cast<std::size_t>(c)].empty()) {
          denom += average(rows[static_cast<std::size_t>(c)], cols);
          ++clusters;
        }
      }
      denom /= clusters;
      if (denom == 0.0) {
        table.notes.push_back(where + ": zero average over all row clusters");
        continue;
      }
      HeatmapCell cellv;
      cellv.row_cluster = b;
      cellv.group = a;
      cellv.percent = 100.0 * average(rows[static_cast<std::size_t>(b)], cols) / denom;
      for (int j : cols) {
        cellv.terms.push_back(tfidf.col_names.empty()
                                  ? std::to_string(j)
                                  : tfidf.col_names[static_cast<std::size_t>(j)]);
      }
      table.cells.push_back(std::move(cellv));
    }
  }
  return table;
}

} // namespace bdbc
