#include "muacp/compression.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <random>
#include <tuple>

namespace muacp::compression {

std::size_t wire_bytes(const AbstractMessage& m) {
  std::size_t n = wire::kMinMessageBytes + m.payload.size();
  for (const auto& o : m.options) {
    n += wire::kOptionOverheadBytes + o.length;
  }
  return n;
}

void MessageDistribution::validate() const {
  if (support.empty()) {
    throw InvalidDistribution("distribution has empty support");
  }
  if (support.size() > kMaxSupport) {
    throw InvalidDistribution("support larger than " + std::to_string(kMaxSupport));
  }
  double sum = 0;
  for (const auto& [m, p] : support) {
    if (!std::isfinite(p) || p < 0) {
      throw InvalidDistribution("probabilities must be finite and non-negative");
    }
    sum += p;
    std::size_t opt_bytes = 0;
    for (const auto& o : m.options) {
      opt_bytes += wire::kOptionOverheadBytes + o.length;
    }
    if (m.options.size() > wire::kMaxOptions || opt_bytes > wire::kMaxOptionBytes ||
        m.payload.size() > wire::kMaxPayloadBytes) {
      throw InvalidDistribution("support entry is not a well-formed message shape");
    }
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    throw InvalidDistribution("probabilities sum to " + std::to_string(sum) + ", not 1");
  }
}

MessageDistribution normalized(const MessageDistribution& d) {
  std::map<AbstractMessage, double> merged;
  for (const auto& [m, p] : d.support) {
    merged[m] += p;
  }
  MessageDistribution out;
  out.name = d.name;
  out.support.assign(merged.begin(), merged.end());
  return out;
}

double shannon(const std::vector<double>& probabilities) {
  double h = 0;
  for (double p : probabilities) {
    if (p > 0) {
      h -= p * std::log2(p);
    }
  }
  return h;
}

namespace {

// Components grouped by their conditioning prefix, probabilities kept joint.
struct Decomposition {
  std::map<wire::Verb, double> v;
  std::map<wire::Verb, std::map<OptionProfile, double>> o_given_v;
  std::map<std::pair<wire::Verb, OptionProfile>, std::map<Bytes, double>> p_given_vo;
};

Decomposition decompose(const MessageDistribution& d) {
  Decomposition dec;
  for (const auto& [m, p] : d.support) {
    dec.v[m.verb] += p;
    dec.o_given_v[m.verb][m.options] += p;
    dec.p_given_vo[{m.verb, m.options}][m.payload] += p;
  }
  return dec;
}

template <class Map>
std::vector<double> conditional(const Map& joint, double given) {
  std::vector<double> out;
  out.reserve(joint.size());
  for (const auto& [k, p] : joint) {
    out.push_back(given > 0 ? p / given : 0.0);
  }
  return out;
}

template <class Map>
double mass(const Map& m) {
  double s = 0;
  for (const auto& [k, p] : m) {
    s += p;
  }
  return s;
}

}  // namespace

EntropyReport entropy(const MessageDistribution& d) {
  d.validate();
  const auto n = normalized(d);
  const auto dec = decompose(n);
  EntropyReport r;
  std::vector<double> pv;
  for (const auto& [v, p] : dec.v) {
    pv.push_back(p);
  }
  r.h_v = shannon(pv);
  for (const auto& [v, os] : dec.o_given_v) {
    const double given = dec.v.at(v);
    r.h_o_given_v += given * shannon(conditional(os, given));
  }
  for (const auto& [vo, ps] : dec.p_given_vo) {
    const double given = mass(ps);
    r.h_p_given_vo += given * shannon(conditional(ps, given));
  }
  std::vector<double> joint;
  for (const auto& [m, p] : n.support) {
    joint.push_back(p);
  }
  r.h_total = shannon(joint);
  if (std::abs(r.h_total - (r.h_v + r.h_o_given_v + r.h_p_given_vo)) > 1e-9) {
    throw Error("entropy chain rule violated: " + std::to_string(r.h_total));
  }
  return r;
}

bool HuffmanCode::within_one_bit(double tol) const {
  return expected_length >= entropy - tol && expected_length < entropy + 1.0 + tol;
}

HuffmanCode huffman_code(const std::vector<double>& weights) {
  HuffmanCode code;
  const std::size_t n = weights.size();
  code.codewords.assign(n, "");
  if (n == 0) {
    return code;
  }
  double total = 0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0) {
      throw InvalidDistribution("Huffman weights must be finite and non-negative");
    }
    total += w;
  }
  if (total <= 0) {
    throw InvalidDistribution("Huffman weights sum to zero");
  }
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = weights[i] / total;
  }

  if (n > 1) {
    // Node i < n is leaf i. Ties go to the node created first, which keeps the table reproducible.
    struct Node {
      double weight;
      std::size_t order;
      std::size_t id;
    };
    auto later = [](const Node& a, const Node& b) { return std::tie(a.weight, a.order) > std::tie(b.weight, b.order); };
    std::priority_queue<Node, std::vector<Node>, decltype(later)> heap(later);
    std::vector<std::pair<std::size_t, std::size_t>> children;
    for (std::size_t i = 0; i < n; ++i) {
      heap.push({p[i], i, i});
    }
    std::size_t next = n;
    while (heap.size() > 1) {
      const Node a = heap.top();
      heap.pop();
      const Node b = heap.top();
      heap.pop();
      children.emplace_back(a.id, b.id);
      heap.push({a.weight + b.weight, next, next});
      ++next;
    }
    // Walk from the root assigning prefixes.
    std::vector<std::string> prefix(next);
    for (std::size_t id = next; id-- > n;) {
      const auto [l, r] = children[id - n];
      prefix[l] = prefix[id] + '0';
      prefix[r] = prefix[id] + '1';
    }
    for (std::size_t i = 0; i < n; ++i) {
      code.codewords[i] = prefix[i];
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto len = static_cast<double>(code.codewords[i].size());
    code.expected_length += p[i] * len;
    code.kraft_sum += std::ldexp(1.0, -static_cast<int>(code.codewords[i].size()));
  }
  code.entropy = shannon(p);
  return code;
}

std::uint32_t BoundParameters::index_bits() const {
  std::uint32_t bits = 0;
  while ((std::uint64_t{1} << bits) < k_max) {
    ++bits;
  }
  return bits;
}

BoundReport check_bound(const MessageDistribution& d, const BoundParameters& params) {
  BoundReport r;
  r.name = d.name;
  r.entropy = entropy(d);
  const auto n = normalized(d);
  r.support = n.support.size();
  const auto dec = decompose(n);

  auto table = [&](const std::vector<double>& probs) {
    auto code = huffman_code(probs);
    ++r.tables_built;
    r.tables_ok = r.tables_ok && code.kraft_ok() && code.within_one_bit();
    return code;
  };

  std::vector<double> pv;
  for (const auto& [v, p] : dec.v) {
    pv.push_back(p);
  }
  r.l_v = table(pv).expected_length;
  for (const auto& [v, os] : dec.o_given_v) {
    const double given = dec.v.at(v);
    r.l_o_given_v += given * table(conditional(os, given)).expected_length;
  }
  for (const auto& [vo, ps] : dec.p_given_vo) {
    const double given = mass(ps);
    r.l_p_given_vo += given * table(conditional(ps, given)).expected_length;
  }

  r.h_hdr = params.h_hdr;
  r.index_bits = params.index_bits();
  r.slack_constant = params.slack_constant;
  r.encoder_bits = r.h_hdr + r.l_v + r.index_bits + r.l_o_given_v + r.l_p_given_vo;
  r.bound_bits = r.entropy.h_total + r.h_hdr + r.index_bits + r.slack_constant;

  for (const auto& [m, p] : n.support) {
    r.wire_bits += p * 8.0 * static_cast<double>(wire_bytes(m));
    r.expected_options += p * static_cast<double>(m.options.size());
  }
  r.alignment_slack_bits = r.wire_bits - r.encoder_bits;
  r.refined_bound_bits = r.entropy.h_total + r.h_hdr + r.expected_options * r.index_bits + r.slack_constant;
  return r;
}

namespace {

AbstractMessage abstract(const wire::Message& m) {
  AbstractMessage a;
  a.verb = m.header.verb;
  for (const auto& o : m.options) {
    a.options.push_back({static_cast<std::uint8_t>(o.type), static_cast<std::uint16_t>(o.value.size())});
  }
  a.payload = m.payload;
  return a;
}

MessageDistribution from_counts(const std::map<AbstractMessage, std::uint64_t>& counts, std::uint64_t total) {
  if (total == 0) {
    throw EmptyLog("log has no send records with wire bytes");
  }
  MessageDistribution d;
  d.name = "corpus";
  for (const auto& [m, c] : counts) {
    d.support.emplace_back(m, static_cast<double>(c) / static_cast<double>(total));
  }
  return d;
}

}  // namespace

MessageDistribution corpus_ingest(const simnet::SimEventLog& log) {
  std::map<AbstractMessage, std::uint64_t> counts;
  std::uint64_t total = 0;
  for (const auto& r : log.records()) {
    if (r.kind != simnet::EventKind::kSend || r.wire_hex.empty()) {
      continue;
    }
    ++counts[abstract(wire::decode(wire::from_hex(r.wire_hex)))];
    ++total;
  }
  return from_counts(counts, total);
}

MessageDistribution corpus_ingest_jsonl(std::string_view jsonl) {
  // Records are flat objects written by SimEventLog; only "kind" and "wire" matter here.
  auto field = [](std::string_view line, std::string_view key) -> std::optional<std::string_view> {
    const std::string needle = "\"" + std::string(key) + "\":\"";
    const auto at = line.find(needle);
    if (at == std::string_view::npos) {
      return std::nullopt;
    }
    const auto start = at + needle.size();
    const auto end = line.find('"', start);
    if (end == std::string_view::npos) {
      return std::nullopt;
    }
    return line.substr(start, end - start);
  };
  std::map<AbstractMessage, std::uint64_t> counts;
  std::uint64_t total = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    auto end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) {
      end = jsonl.size();
    }
    const auto line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) {
      continue;
    }
    if (line.front() != '{' || !field(line, "kind")) {
      throw Error("log line is not an event record");
    }
    if (*field(line, "kind") != "send") {
      continue;
    }
    if (auto hex = field(line, "wire")) {
      ++counts[abstract(wire::decode(wire::from_hex(*hex)))];
      ++total;
    }
  }
  return from_counts(counts, total);
}

MessageDistribution random_distribution(std::uint64_t seed, std::size_t support) {
  if (support == 0 || support > kMaxSupport) {
    throw InvalidDistribution("support size out of range");
  }
  std::mt19937_64 rng(seed);
  auto below = [&](std::uint64_t n) { return rng() % n; };
  std::map<AbstractMessage, double> weights;
  for (std::size_t i = 0; i < support; ++i) {
    AbstractMessage m;
    m.verb = static_cast<wire::Verb>(below(4));
    const auto k = below(4);
    for (std::uint64_t j = 0; j < k; ++j) {
      const auto t = wire::kRegisteredOptionTypes[below(wire::kRegisteredOptionTypes.size())];
      m.options.push_back({static_cast<std::uint8_t>(t), static_cast<std::uint16_t>(below(17))});
    }
    const auto len = below(9);
    for (std::uint64_t j = 0; j < len; ++j) {
      m.payload.push_back(static_cast<std::uint8_t>('a' + below(4)));
    }
    // Cubing a uniform draw gives skewed, far-from-uniform weights.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 + 1e-6;
    weights[m] += u * u * u;
  }
  double total = 0;
  for (const auto& [m, w] : weights) {
    total += w;
  }
  MessageDistribution d;
  d.name = "random-" + std::to_string(seed);
  for (const auto& [m, w] : weights) {
    d.support.emplace_back(m, w / total);
  }
  return d;
}

}  // namespace muacp::compression
