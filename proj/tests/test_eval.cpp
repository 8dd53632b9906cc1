#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <regex>
#include <thread>

#include "tmotif/generator.hpp"
#include "tmotif/harness.hpp"

using namespace tmotif;

namespace {

const PromptTemplates& templates() {
  static const PromptTemplates t = PromptTemplates::load(PromptTemplates::default_dir());
  return t;
}

TaskInstance sample(TaskKind task, const std::string& motif = "triangle", std::uint64_t seed = 1) {
  if (is_level2(task)) return gen_level2_instance(task, default_params(task, "", seed));
  if (is_level0(task)) return gen_level0_instance(task, default_params(task, "", seed));
  if (task == TaskKind::Classification)
    return gen_classification_instance(motif, default_params(task, motif, seed), true);
  if (task == TaskKind::Construction) return gen_construction_instance(motif, default_params(task, motif, seed));
  return gen_detection_instance(motif, default_params(task, motif, seed));
}

/// An answer text that is exactly right for the instance.
std::string perfect_answer(const TaskInstance& inst) {
  const auto& gt = inst.ground_truth;
  switch (inst.task) {
    case TaskKind::Classification:
    case TaskKind::Detection: return gt["label"].get<bool>() ? "Yes" : "No";
    case TaskKind::Construction:
    case TaskKind::SortEdge:
    case TaskKind::ReverseGraph:
      return format_events(events_from_json(
          nlohmann::json::parse((inst.task == TaskKind::Construction ? gt["completion"] : gt["events"]).dump())));
    case TaskKind::MultiDetect: {
      std::string s = "[";
      for (auto& [k, v] : gt["detect"].items())
        if (v.get<bool>()) s += k + ", ";
      return s + "]";
    }
    case TaskKind::Occurrence:
    case TaskKind::MultiCount: {
      std::string s = "[";
      for (auto& [k, v] : gt[inst.task == TaskKind::Occurrence ? "first_occurrence" : "count"].items())
        s += "(" + k + ", " + v.dump() + "), ";
      return s + "]";
    }
    case TaskKind::WhenLink: return "(" + gt["link"].dump() + ", " + gt["dislink"].dump() + ")";
    case TaskKind::WhatEdges: {
      std::string s = "[";
      for (auto& p : gt["edges"]) s += "(" + p[0].dump() + ", " + p[1].dump() + "), ";
      return s + "]";
    }
  }
  return "";
}

}  // namespace

TEST_CASE("section parser and placeholder fill") {
  auto s = parse_sections("[a]\nline one\nline two\n\n[b]\nx {y} {z}\n");
  CHECK(s["a"] == "line one\nline two");
  CHECK(fill(s["b"], {{"y", "1"}}) == "x 1 {z}");
}

TEST_CASE("prompts carry the task wording") {
  auto cls = render_prompt(templates(), sample(TaskKind::Classification), Strategy::ZeroShot).user;
  CHECK(cls.find("Whether the given undirected dynamic graph is the given motif?") != std::string::npos);
  CHECK(cls.find("(u0, u1, t0, a)") != std::string::npos);
  CHECK(cls.find("3-node, 3-edge, 5-temporal motif") != std::string::npos);

  auto cnt = render_prompt(templates(), sample(TaskKind::MultiCount), Strategy::ZeroShot).user;
  CHECK(cnt.find("How many times does each of the above temporal motifs appear") != std::string::npos);
  CHECK(cnt.find("triangle: a 3-node, 3-edge, 3-temporal motif") != std::string::npos);
  CHECK(cnt.find("Possible temporal motifs in the dynamic graph include:") != std::string::npos);

  auto l0 = render_prompt(templates(), sample(TaskKind::WhenLink), Strategy::ZeroShot).user;
  CHECK(l0.find("temporal motif") == std::string::npos);
}

TEST_CASE("component order is fixed") {
  auto text = render_prompt(templates(), sample(TaskKind::Detection), Strategy::ZeroShot).user;
  auto dyg = text.find("In an undirected dynamic graph");
  auto motif = text.find("A k-node, l-edge");
  auto task = text.find("Your task is to determine");
  auto ans = text.find("Give the answer");
  auto q = text.find("Here is what you need to answer");
  CHECK(dyg < motif);
  CHECK(motif < task);
  CHECK(task < ans);
  CHECK(ans < q);
}

TEST_CASE("every task renders under every strategy, deterministically") {
  for (auto task : all_tasks()) {
    auto inst = sample(task, task == TaskKind::Construction ? "4-cycle" : "triangle");
    for (auto st : {Strategy::ZeroShot, Strategy::OneShot, Strategy::ZeroShotCot, Strategy::OneShotCot}) {
      CAPTURE(to_string(task));
      CAPTURE(to_string(st));
      auto a = render_prompt(templates(), inst, st).user;
      CHECK(a == render_prompt(templates(), inst, st).user);
      CHECK(!std::regex_search(a, std::regex(R"(\{[a-z_]+\})")));
      bool shot = st == Strategy::OneShot || st == Strategy::OneShotCot;
      bool cot = st == Strategy::ZeroShotCot || st == Strategy::OneShotCot;
      CHECK((a.find("Here is an example:") != std::string::npos) == shot);
      CHECK((a.find("Chain of Thought:") != std::string::npos) == (shot && cot));
      if (!is_level0(task)) CHECK((a.find("only focus on added edges") != std::string::npos) == cot);
    }
  }
  CHECK(strategy_from_string("one_shot_cot") == Strategy::OneShotCot);
  CHECK_THROWS(strategy_from_string("few_shot"));
}

TEST_CASE("exemplar answers agree with the engine") {
  for (auto task : all_tasks()) {
    CAPTURE(to_string(task));
    const auto& ex = templates().exemplar(task);
    auto payload = parse_answer("Answer: " + ex.answer, task);
    REQUIRE(!is_failure(payload));
    CHECK(score_instance(ex.instance, payload).value == 1.0);
  }
}

TEST_CASE("missing templates are reported") {
  CHECK_THROWS_AS(PromptTemplates::load("/nonexistent/prompts"), TemplateError);
}

TEST_CASE("parse_answer basics") {
  CHECK(std::get<bool>(parse_answer("the graph has it... Answer: Yes", TaskKind::Detection)) == true);
  CHECK(std::get<bool>(parse_answer("Answer: Yes\nActually no.\nAnswer: **No**", TaskKind::Detection)) == false);
  CHECK(is_failure(parse_answer("I am not sure", TaskKind::Detection)));

  auto m = std::get<std::map<std::string, std::uint64_t>>(
      parse_answer("Answer: [(triangle, 3), (3-star, 5)]", TaskKind::MultiCount));
  CHECK(m == std::map<std::string, std::uint64_t>{{"triangle", 3}, {"3-star", 5}});
  auto m2 = std::get<std::map<std::string, std::uint64_t>>(
      parse_answer("Answer: [('4-cycle', 7), (\"butterfly\",2)]", TaskKind::Occurrence));
  CHECK(m2 == std::map<std::string, std::uint64_t>{{"4-cycle", 7}, {"butterfly", 2}});

  auto names = std::get<std::set<std::string>>(
      parse_answer("Answer: bitriangle, 4-tailedtriangle and triangle", TaskKind::MultiDetect));
  CHECK(names == std::set<std::string>{"bitriangle", "4-tailedtriangle", "triangle"});

  auto ev = std::get<std::vector<EdgeEvent>>(parse_answer("Answer: [(3, 0, 5, 'a')]", TaskKind::Construction));
  REQUIRE(ev.size() == 1);
  CHECK(ev[0] == EdgeEvent{3, 0, 5, Op::Add});
  CHECK(std::get<std::vector<EdgeEvent>>(parse_answer("Answer: []", TaskKind::SortEdge)).empty());
  CHECK(is_failure(parse_answer("Answer: add an edge", TaskKind::Construction)));

  auto lt = std::get<LinkTimes>(parse_answer("Answer: (1, 6)", TaskKind::WhenLink));
  CHECK(lt == LinkTimes{1, 6});
  auto pairs = std::get<std::set<NodePair>>(parse_answer("Answer: [(2, 1), (3, 4)]", TaskKind::WhatEdges));
  CHECK(pairs == std::set<NodePair>{NodePair::of(1, 2), NodePair::of(3, 4)});
}

TEST_CASE("scoring formulas") {
  TaskInstance inst;
  inst.task = TaskKind::MultiDetect;
  inst.ground_truth["detect"] = {{"triangle", true}, {"3-star", true}, {"4-path", true}, {"4-cycle", false}};
  auto p = parse_answer("Answer: triangle, 3-star, 4-cycle", TaskKind::MultiDetect);
  CHECK(score_instance(inst, p).value == doctest::Approx(1.0 / 3));
  CHECK(score_instance(inst, parse_answer("Answer: 4-cycle", TaskKind::MultiDetect)).value == 0.0);
  CHECK(score_instance(inst, parse_answer("Answer: I don't know", TaskKind::MultiDetect)).value == 0.0);

  inst.task = TaskKind::MultiCount;
  inst.ground_truth["count"] = {{"triangle", 2}, {"3-star", 4}};
  CHECK(score_instance(inst, parse_answer("Answer: [(triangle, 2), (3-star, 4)]", inst.task)).value == 1.0);
  CHECK(score_instance(inst, parse_answer("Answer: [(triangle, 9), (3-star, 2)]", inst.task)).value ==
        doctest::Approx(0.75));

  inst.task = TaskKind::Occurrence;
  inst.ground_truth["first_occurrence"] = {{"triangle", 2}, {"3-star", 4}};
  CHECK(score_instance(inst, parse_answer("Answer: [(triangle, 2), (3-star, 5), (4-path, 1)]", inst.task)).value ==
        0.5);

  inst.task = TaskKind::MultiDetect;
  inst.ground_truth["detect"] = {{"triangle", false}};
  CHECK(score_instance(inst, parse_answer("Answer: none", inst.task)).value == 1.0);
  CHECK(score_instance(inst, parse_answer("Answer: triangle", inst.task)).value == 0.0);
}

TEST_CASE("construction accepts any completing edge") {
  auto inst = sample(TaskKind::Construction, "4-cycle", 3);
  auto canonical = events_from_json(nlohmann::json::parse(inst.ground_truth["completion"].dump()))[0];
  CHECK(score_instance(inst, std::vector<EdgeEvent>{canonical}).value == 1.0);
  auto swapped = canonical;
  std::swap(swapped.u, swapped.v);
  CHECK(score_instance(inst, std::vector<EdgeEvent>{swapped}).value == 1.0);
  CHECK(score_instance(inst, std::vector<EdgeEvent>{canonical, canonical}).value == 0.0);
  auto del = canonical;
  del.op = Op::Delete;
  CHECK(score_instance(inst, std::vector<EdgeEvent>{del}).value == 0.0);
}

TEST_CASE("sort_edge ignores order within a timestamp") {
  TaskInstance inst;
  inst.task = TaskKind::SortEdge;
  inst.graph = parse_graph("[(2, 3, 1, a), (0, 1, 1, a), (0, 4, 0, a)]");
  inst.ground_truth = compute_ground_truth(inst);
  CHECK(score_instance(inst, parse_answer("Answer: [(0, 4, 0, a), (2, 3, 1, a), (0, 1, 1, a)]", inst.task)).value ==
        1.0);
  CHECK(score_instance(inst, parse_answer("Answer: [(0, 4, 0, a), (0, 1, 1, a), (3, 2, 1, a)]", inst.task)).value ==
        1.0);
  CHECK(score_instance(inst, parse_answer("Answer: [(2, 3, 1, a), (0, 4, 0, a), (0, 1, 1, a)]", inst.task)).value ==
        0.0);
  CHECK(score_instance(inst, parse_answer("Answer: [(0, 4, 0, a), (2, 3, 1, a)]", inst.task)).value == 0.0);
}

TEST_CASE("perfect answers score 1 on every task") {
  for (auto task : all_tasks())
    for (std::uint64_t s = 0; s < 5; ++s) {
      auto inst = sample(task, task == TaskKind::Construction ? "4-cycle" : "triangle", s);
      auto sc = score_instance(inst, parse_answer("Answer: " + perfect_answer(inst), task));
      CAPTURE(to_string(task));
      CHECK(sc.value == 1.0);
    }
}

namespace {

/// Local OpenAI-style endpoint; `handler` decides each response.
struct MockEndpoint {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> hits{0};

  explicit MockEndpoint(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server.Post("/v1/chat/completions", [this, handler](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      handler(req, res);
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~MockEndpoint() {
    server.stop();
    thread.join();
  }
  EndpointConfig config() const {
    EndpointConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    c.model = "mock";
    c.api_key = "test-key";
    c.backoff = std::chrono::milliseconds(1);
    c.max_retries = 2;
    return c;
  }
};

void reply(httplib::Response& res, const std::string& text, bool usage) {
  nlohmann::json j;
  j["choices"] = {{{"message", {{"role", "assistant"}, {"content", text}}}}};
  if (usage) j["usage"] = {{"prompt_tokens", 100}, {"completion_tokens", 5}};
  res.set_content(j.dump(), "application/json");
}

}  // namespace

TEST_CASE("HTTP client against a mock endpoint") {
  MockEndpoint ep([](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    CHECK(body["temperature"] == 0);
    CHECK(req.get_header_value("Authorization") == "Bearer test-key");
    reply(res, "Thinking... Answer: No", false);
  });
  HttpChatModel model(ep.config());
  auto c = model.complete({{"user", "hi"}});
  CHECK(std::get<bool>(parse_answer(c.text, TaskKind::Detection)) == false);
  CHECK(!c.usage.prompt_tokens);
  CHECK(!c.usage.total());
}

TEST_CASE("HTTP errors are typed and retried") {
  std::atomic<int> calls{0};
  MockEndpoint flaky([&](const httplib::Request&, httplib::Response& res) {
    if (++calls < 3) {
      res.status = 503;
      return;
    }
    reply(res, "Answer: Yes", true);
  });
  HttpChatModel model(flaky.config());
  auto c = model.complete({{"user", "hi"}});
  CHECK(c.usage.total() == 105u);
  CHECK(calls == 3);

  MockEndpoint denied([](const httplib::Request&, httplib::Response& res) { res.status = 401; });
  HttpChatModel bad(denied.config());
  try {
    bad.complete({{"user", "hi"}});
    FAIL("expected LlmError");
  } catch (const LlmError& e) {
    CHECK(e.kind() == LlmError::Kind::Auth);
  }
  CHECK(denied.hits == 1);

  MockEndpoint limited([](const httplib::Request&, httplib::Response& res) { res.status = 429; });
  try {
    HttpChatModel(limited.config()).complete({{"user", "hi"}});
    FAIL("expected LlmError");
  } catch (const LlmError& e) {
    CHECK(e.kind() == LlmError::Kind::Quota);
  }
  CHECK(limited.hits == 3);
}

TEST_CASE("run_benchmark: accuracy, resumability, errors") {
  BatchRequest req;
  req.task = TaskKind::Detection;
  req.motif = "triangle";
  req.params = default_params(req.task, req.motif, 5);
  req.count = 12;
  auto instances = generate_batch(req);
  std::map<std::string, const TaskInstance*> by_prompt;
  for (const auto& inst : instances)
    by_prompt[render_prompt(templates(), inst, Strategy::ZeroShot).user] = &inst;

  std::atomic<int> calls{0};
  SolverFactory oracle_factory = [&] {
    auto model = std::make_unique<ScriptedModel>([&](const std::vector<ChatMessage>& msgs) {
      ++calls;
      const auto* inst = by_prompt.at(msgs.back().content);
      Completion c;
      c.text = std::string("Answer: ") + (inst->ground_truth["label"].get<bool>() ? "Yes" : "No");
      c.usage.prompt_tokens = 50;
      c.usage.completion_tokens = 2;
      return c;
    });
    return std::make_unique<DirectSolver>(std::move(model), templates(), Strategy::ZeroShot);
  };

  auto dir = std::filesystem::temp_directory_path() / "tmotif_run_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  RunOptions opts;
  opts.concurrency = 3;
  opts.out_path = (dir / "run.jsonl").string();

  auto report = run_benchmark(instances, oracle_factory, opts);
  CHECK(report.attempted == 12);
  CHECK(calls == 12);
  REQUIRE(report.summary.size() == 1);
  CHECK(report.summary[0].accuracy == 1.0);
  CHECK(report.summary[0].avg_tokens == 52.0);
  std::ifstream csv(opts.out_path + ".summary.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "task,motif,accuracy,avg_tokens");

  auto again = run_benchmark(instances, oracle_factory, opts);
  CHECK(again.attempted == 0);
  CHECK(again.skipped == 12);
  CHECK(calls == 12);

  auto first = nlohmann::ordered_json::parse([&] {
    std::ifstream in(opts.out_path);
    std::string line;
    std::getline(in, line);
    return line;
  }());
  std::vector<std::string> keys;
  for (auto& [k, v] : first.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"id", "task", "motif", "answer_raw", "parsed", "score", "prompt_tokens",
                                         "completion_tokens", "latency_ms"});

  // Endpoint down: every instance is recorded as errored and the run completes.
  EndpointConfig down;
  down.base_url = "http://127.0.0.1:1/v1";
  down.model = "m";
  down.max_retries = 0;
  opts.out_path = (dir / "down.jsonl").string();
  auto failed = run_benchmark(
      instances,
      [&] {
        return std::make_unique<DirectSolver>(std::make_unique<HttpChatModel>(down), templates(), Strategy::ZeroShot);
      },
      opts);
  CHECK(failed.attempted == 12);
  CHECK(failed.errored == 12);
  CHECK(failed.summary[0].accuracy == 0.0);
  CHECK(!failed.summary[0].avg_tokens);
  auto recs = read_records(opts.out_path);
  REQUIRE(recs.size() == 12);
  CHECK(recs[0].error->rfind("network", 0) == 0);
  std::filesystem::remove_all(dir);
}
