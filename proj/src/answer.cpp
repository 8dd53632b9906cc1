#include "tmotif/answer.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace tmotif {

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n*`";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

bool says_empty(const std::string& region) {
  static const std::regex empty_re(R"(^\s*(\[\s*\]|\{\s*\}|none\b|nothing\b|no motifs?\b|no edges?\b))",
                                   std::regex::icase);
  return std::regex_search(region, empty_re);
}

Payload parse_bool(const std::string& region) {
  static const std::regex yn(R"(^\W*(yes|no)\b)", std::regex::icase);
  std::smatch m;
  if (std::regex_search(region, m, yn)) return lower(m[1].str()) == "yes";
  return ParseFailure{"expected Yes or No"};
}

Payload parse_events_answer(const std::string& region) {
  static const std::regex tuple(
      R"([\(\[]\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*,\s*['"]?([adAD])['"]?\s*[\)\]])");
  std::vector<EdgeEvent> ev;
  for (auto it = std::sregex_iterator(region.begin(), region.end(), tuple); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    EdgeEvent e{std::stoull(m[1].str()), std::stoull(m[2].str()), std::stoull(m[3].str()),
                std::tolower(m[4].str()[0]) == 'a' ? Op::Add : Op::Delete};
    ev.push_back(e);
  }
  if (ev.empty() && !says_empty(region)) return ParseFailure{"no (u, v, t, op) tuples found"};
  return ev;
}

/// Catalog names found as whole tokens, in order of appearance.
std::vector<std::pair<std::size_t, std::string>> find_names(const std::string& region) {
  static const std::regex token(R"([A-Za-z0-9][A-Za-z0-9_-]*)");
  std::vector<std::pair<std::size_t, std::string>> out;
  for (auto it = std::sregex_iterator(region.begin(), region.end(), token); it != std::sregex_iterator(); ++it) {
    auto name = lower(it->str());
    std::replace(name.begin(), name.end(), '_', '-');
    if (is_catalog_motif(name)) out.emplace_back(static_cast<std::size_t>(it->position()), name);
  }
  return out;
}

Payload parse_names(const std::string& region) {
  auto found = find_names(region);
  if (found.empty() && region.empty()) return ParseFailure{"empty answer"};
  std::set<std::string> names;
  for (auto& [pos, n] : found) names.insert(n);
  return names;
}

Payload parse_name_ints(const std::string& region) {
  static const std::regex pair_re(
      R"re(['"]?([A-Za-z0-9][A-Za-z0-9_-]*)['"]?\s*[,:=]\s*(\d+))re");
  std::map<std::string, std::uint64_t> out;
  for (auto it = std::sregex_iterator(region.begin(), region.end(), pair_re); it != std::sregex_iterator(); ++it) {
    auto name = lower((*it)[1].str());
    std::replace(name.begin(), name.end(), '_', '-');
    if (!is_catalog_motif(name)) continue;
    out[name] = std::stoull((*it)[2].str());
  }
  if (out.empty() && !says_empty(region)) return ParseFailure{"no (name, integer) pairs found"};
  return out;
}

Payload parse_link(const std::string& region) {
  static const std::regex slot(R"((\d+)|\b(none|null|never)\b)", std::regex::icase);
  std::vector<std::optional<Timestamp>> vals;
  for (auto it = std::sregex_iterator(region.begin(), region.end(), slot); it != std::sregex_iterator() && vals.size() < 2;
       ++it) {
    if ((*it)[1].matched)
      vals.emplace_back(std::stoull((*it)[1].str()));
    else
      vals.emplace_back(std::nullopt);
  }
  if (vals.size() < 2) return ParseFailure{"expected (link, dislink)"};
  return LinkTimes{vals[0], vals[1]};
}

Payload parse_pairs(const std::string& region) {
  static const std::regex pr(R"([\(\[]\s*(\d+)\s*,\s*(\d+)\s*[\)\]])");
  std::set<NodePair> out;
  for (auto it = std::sregex_iterator(region.begin(), region.end(), pr); it != std::sregex_iterator(); ++it)
    out.insert(NodePair::of(std::stoull((*it)[1].str()), std::stoull((*it)[2].str())));
  if (out.empty() && !says_empty(region)) return ParseFailure{"no (u, v) pairs found"};
  return out;
}

/// Same multiset and nondecreasing time: ties may come in any order.
bool same_up_to_ties(std::vector<EdgeEvent> got, std::vector<EdgeEvent> want) {
  if (got.size() != want.size()) return false;
  for (std::size_t i = 1; i < got.size(); ++i)
    if (got[i].t < got[i - 1].t) return false;
  auto norm = [](std::vector<EdgeEvent>& v) {
    for (auto& e : v)
      if (e.u > e.v) std::swap(e.u, e.v);
    std::sort(v.begin(), v.end());
  };
  norm(got);
  norm(want);
  return got == want;
}

std::vector<EdgeEvent> gt_events(const nlohmann::ordered_json& j) {
  return events_from_json(nlohmann::json::parse(j.dump()));
}

template <class T>
const T* as(const Payload& p) {
  return std::get_if<T>(&p);
}

}  // namespace

std::string answer_region(const std::string& raw) {
  static const std::string marker = "Answer:";
  auto pos = raw.rfind(marker);
  if (pos == std::string::npos) {
    // Case-insensitive fallback.
    auto low = lower(raw);
    pos = low.rfind("answer:");
    if (pos == std::string::npos) return trim(raw);
  }
  return trim(raw.substr(pos + marker.size()));
}

Payload parse_answer(const std::string& raw, TaskKind task) {
  auto region = answer_region(raw);
  switch (task) {
    case TaskKind::Classification:
    case TaskKind::Detection: return parse_bool(region);
    case TaskKind::Construction:
    case TaskKind::SortEdge:
    case TaskKind::ReverseGraph: return parse_events_answer(region);
    case TaskKind::MultiDetect: return parse_names(region);
    case TaskKind::Occurrence:
    case TaskKind::MultiCount: return parse_name_ints(region);
    case TaskKind::WhenLink: return parse_link(region);
    case TaskKind::WhatEdges: return parse_pairs(region);
  }
  return ParseFailure{"unknown task"};
}

bool is_failure(const Payload& p) { return std::holds_alternative<ParseFailure>(p); }

nlohmann::ordered_json payload_to_json(const Payload& p) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ParseFailure>) {
          return {{"parse_error", v.reason}};
        } else if constexpr (std::is_same_v<T, bool>) {
          return v;
        } else if constexpr (std::is_same_v<T, std::vector<EdgeEvent>>) {
          return events_to_json(v);
        } else if constexpr (std::is_same_v<T, std::set<std::string>>) {
          return nlohmann::ordered_json(v);
        } else if constexpr (std::is_same_v<T, std::map<std::string, std::uint64_t>>) {
          nlohmann::ordered_json j = nlohmann::ordered_json::object();
          for (const auto& [k, n] : v) j[k] = n;
          return j;
        } else if constexpr (std::is_same_v<T, LinkTimes>) {
          auto opt = [](const std::optional<Timestamp>& t) {
            return t ? nlohmann::ordered_json(*t) : nlohmann::ordered_json(nullptr);
          };
          return {opt(v.first), opt(v.second)};
        } else {
          auto arr = nlohmann::ordered_json::array();
          for (const auto& pr : v) arr.push_back({pr.lo, pr.hi});
          return arr;
        }
      },
      p);
}

Score score_instance(const TaskInstance& inst, const Payload& payload) {
  Score s;
  s.task = inst.task;
  if (is_failure(payload)) return s;
  const auto& gt = inst.ground_truth;

  switch (inst.task) {
    case TaskKind::Classification:
    case TaskKind::Detection:
      if (auto b = as<bool>(payload)) s.value = *b == gt.at("label").get<bool>() ? 1.0 : 0.0;
      break;

    case TaskKind::Construction:
      if (auto ev = as<std::vector<EdgeEvent>>(payload)) {
        if (ev->size() == 1 && (*ev)[0].op == Op::Add && (*ev)[0].u != (*ev)[0].v)
          s.value = detect(inst.graph.with_event((*ev)[0]), inst.query_motif()) ? 1.0 : 0.0;
      }
      break;

    case TaskKind::MultiDetect:
      if (auto names = as<std::set<std::string>>(payload)) {
        std::size_t positives = 0, tp = 0, fp = 0;
        for (const auto& [name, present] : gt.at("detect").items()) {
          bool claimed = names->count(name) > 0;
          positives += present.get<bool>();
          if (claimed) (present.get<bool>() ? tp : fp) += 1;
          s.per_motif[name] = claimed == present.get<bool>() ? 1.0 : 0.0;
        }
        for (const auto& n : *names)
          if (!gt.at("detect").contains(n)) ++fp;
        if (positives == 0)
          s.value = names->empty() ? 1.0 : 0.0;
        else
          s.value = tp > fp ? static_cast<double>(tp - fp) / static_cast<double>(positives) : 0.0;
      }
      break;

    case TaskKind::Occurrence:
      if (auto m = as<std::map<std::string, std::uint64_t>>(payload)) {
        const auto& fo = gt.at("first_occurrence");
        std::size_t correct = 0;
        for (const auto& [name, t] : fo.items()) {
          auto it = m->find(name);
          bool ok = it != m->end() && it->second == t.get<std::uint64_t>();
          correct += ok;
          s.per_motif[name] = ok ? 1.0 : 0.0;
        }
        if (fo.empty())
          s.value = m->empty() ? 1.0 : 0.0;
        else
          s.value = static_cast<double>(correct) / static_cast<double>(fo.size());
      }
      break;

    case TaskKind::MultiCount:
      if (auto m = as<std::map<std::string, std::uint64_t>>(payload)) {
        const auto& cnt = gt.at("count");
        double sum = 0;
        for (const auto& [name, c] : cnt.items()) {
          auto g = c.get<std::uint64_t>();
          auto it = m->find(name);
          double r = it == m->end() ? 0.0 : static_cast<double>(std::min(it->second, g)) / static_cast<double>(g);
          s.per_motif[name] = r;
          sum += r;
        }
        if (cnt.empty()) {
          bool none = std::all_of(m->begin(), m->end(), [](auto& kv) { return kv.second == 0; });
          s.value = none ? 1.0 : 0.0;
        } else {
          s.value = sum / static_cast<double>(cnt.size());
        }
      }
      break;

    case TaskKind::SortEdge:
    case TaskKind::ReverseGraph:
      if (auto ev = as<std::vector<EdgeEvent>>(payload)) s.value = same_up_to_ties(*ev, gt_events(gt.at("events")));
      break;

    case TaskKind::WhenLink:
      if (auto lt = as<LinkTimes>(payload)) {
        auto opt = [](const nlohmann::ordered_json& j) {
          return j.is_null() ? std::optional<Timestamp>{} : std::optional<Timestamp>{j.get<Timestamp>()};
        };
        s.value = lt->first == opt(gt.at("link")) && lt->second == opt(gt.at("dislink"));
      }
      break;

    case TaskKind::WhatEdges:
      if (auto pairs = as<std::set<NodePair>>(payload)) {
        std::set<NodePair> want;
        for (const auto& p : gt.at("edges")) want.insert(NodePair::of(p[0].get<NodeId>(), p[1].get<NodeId>()));
        s.value = *pairs == want;
      }
      break;
  }
  return s;
}

}  // namespace tmotif
