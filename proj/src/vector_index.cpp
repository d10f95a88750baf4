#include <algorithm>
#include <charconv>
#include <cmath>
#include <queue>

#include "prockit/error.hpp"
#include "prockit/textindex.hpp"

namespace prockit {

namespace {

constexpr std::string_view kMagic = "PROCKIT-VEC 1";

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

std::vector<float> unit(std::span<const float> v) {
  std::vector<float> out(v.begin(), v.end());
  const double n = std::sqrt(dot(v, v));
  if (n > 0.0)
    for (float& x : out) x = static_cast<float>(x / n);
  return out;
}

}  // namespace

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::kDimensionMismatch, "vectors differ in length");
  const double na = dot(a, a);
  const double nb = dot(b, b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / std::sqrt(na * nb);
}

VectorIndex VectorIndex::build(std::size_t dim, Metric metric,
                               std::vector<std::pair<std::string, Vector>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  VectorIndex index(dim, metric);
  index.ids_.reserve(entries.size());
  index.data_.reserve(entries.size() * dim);
  for (auto& [id, v] : entries) {
    if (v.size() != dim)
      throw Error(ErrorCode::kDimensionMismatch,
                  "vector '" + id + "' has " + std::to_string(v.size()) +
                      " components, expected " + std::to_string(dim));
    if (!index.by_id_.emplace(id, index.ids_.size()).second)
      throw Error(ErrorCode::kDuplicateId, "duplicate vector id '" + id + "'");
    const auto stored = metric == Metric::kCosine ? unit(v) : v;
    index.data_.insert(index.data_.end(), stored.begin(), stored.end());
    index.ids_.push_back(std::move(id));
  }
  return index;
}

std::span<const float> VectorIndex::vector(std::size_t i) const {
  return std::span<const float>(data_).subspan(i * dim_, dim_);
}

std::size_t VectorIndex::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? ids_.size() : it->second;
}

double VectorIndex::distance(std::span<const float> query, std::size_t i) const {
  const auto v = vector(i);
  if (metric_ == Metric::kCosine) {
    const double n = std::sqrt(dot(query, query));
    if (n == 0.0) return 1.0;
    return 1.0 - dot(query, v) / n;
  }
  double s = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    const double d = static_cast<double>(query[j]) - v[j];
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<Neighbor> VectorIndex::knn(std::span<const float> query, std::size_t k) const {
  if (query.size() != dim_)
    throw Error(ErrorCode::kDimensionMismatch,
                "query has " + std::to_string(query.size()) + " components, expected " +
                    std::to_string(dim_));
  k = std::min(k, ids_.size());
  if (k == 0) return {};
  // Max-heap of the best k so far; ids are stored in ascending order, so a
  // strict comparison keeps the lowest id among equal distances.
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry> heap;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const double d = distance(query, i);
    if (heap.size() < k) {
      heap.emplace(d, i);
    } else if (d < heap.top().first) {
      heap.pop();
      heap.emplace(d, i);
    }
  }
  std::vector<Entry> best;
  best.reserve(heap.size());
  while (!heap.empty()) {
    best.push_back(heap.top());
    heap.pop();
  }
  std::sort(best.begin(), best.end());
  std::vector<Neighbor> out;
  out.reserve(best.size());
  for (const auto& [d, i] : best) out.push_back({ids_[i], d});
  return out;
}

std::string VectorIndex::serialize() const {
  std::string body = "dim " + std::to_string(dim_) + "\n";
  body += std::string("metric ") + (metric_ == Metric::kCosine ? "cosine" : "l2") + "\n";
  body += "count " + std::to_string(ids_.size()) + "\n";
  char buf[32];
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i].find_first_of("\t\n") != std::string::npos)
      throw Error(ErrorCode::kValidation, "vector id contains tab or newline");
    body += ids_[i];
    body.push_back('\t');
    const auto v = vector(i);
    for (std::size_t j = 0; j < dim_; ++j) {
      if (j) body.push_back(' ');
      const auto res = std::to_chars(buf, buf + sizeof(buf), v[j]);
      body.append(buf, res.ptr);
    }
    body.push_back('\n');
  }
  return persist::seal(std::move(body), kMagic);
}

VectorIndex VectorIndex::deserialize(std::string_view data) {
  const auto lines = persist::open(data, kMagic);
  if (lines.size() < 3 || lines[0].rfind("dim ", 0) != 0 ||
      lines[1].rfind("metric ", 0) != 0 || lines[2].rfind("count ", 0) != 0)
    throw Error(ErrorCode::kValidation, "bad vector index header");
  const std::size_t dim = std::stoull(lines[0].substr(4));
  const std::string metric = lines[1].substr(7);
  if (metric != "cosine" && metric != "l2")
    throw Error(ErrorCode::kValidation, "unknown metric '" + metric + "'");
  const std::size_t count = std::stoull(lines[2].substr(6));
  if (lines.size() != count + 3) throw Error(ErrorCode::kValidation, "vector count mismatch");
  VectorIndex index(dim, metric == "cosine" ? Metric::kCosine : Metric::kL2);
  index.data_.reserve(count * dim);
  for (std::size_t i = 0; i < count; ++i) {
    const std::string& line = lines[i + 3];
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorCode::kValidation, "bad vector line");
    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    for (std::size_t j = 0; j < dim; ++j) {
      if (j) {
        if (p >= end || *p != ' ') throw Error(ErrorCode::kValidation, "bad vector line");
        ++p;
      }
      float x = 0.0f;
      const auto res = std::from_chars(p, end, x);
      if (res.ec != std::errc()) throw Error(ErrorCode::kValidation, "bad vector component");
      index.data_.push_back(x);
      p = res.ptr;
    }
    if (p != end) throw Error(ErrorCode::kDimensionMismatch, "vector longer than dim");
    std::string id = line.substr(0, tab);
    if (!index.ids_.empty() && !(index.ids_.back() < id))
      throw Error(ErrorCode::kValidation, "vector ids not in ascending order");
    index.by_id_.emplace(id, i);
    index.ids_.push_back(std::move(id));
  }
  return index;
}

void VectorIndex::save(const std::filesystem::path& path) const {
  persist::write_file(path, serialize());
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
  return deserialize(persist::read_file(path));
}

}  // namespace prockit
