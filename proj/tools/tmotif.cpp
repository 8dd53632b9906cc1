#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "tmotif/agent.hpp"
#include "tmotif/dispatcher.hpp"
#include "tmotif/generator.hpp"
#include "tmotif/harness.hpp"
#include "tmotif/motif.hpp"

using namespace tmotif;

namespace {

struct NamedGraph {
  std::string id;
  DynamicGraph graph;
};

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream s;
    s << std::cin.rdbuf();
    return s.str();
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!(out << text)) throw std::runtime_error("cannot write " + path);
}

/// A file (or "-") holding a quadruplet list, a JSON event array, or JSONL of
/// graph / instance records; a literal list is also accepted in place of a path.
std::vector<NamedGraph> load_graphs(const std::string& arg) {
  std::string text = arg == "-" || std::filesystem::exists(arg) ? slurp(arg) : arg;
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw std::runtime_error("no graph in " + arg);
  if (text[first] == '[') {
    try {
      return {{"graph", parse_graph(text)}};
    } catch (const GraphError&) {
      return {{"graph", DynamicGraph(events_from_json(nlohmann::json::parse(text)))}};
    }
  }
  std::vector<NamedGraph> out;
  std::istringstream in(text);
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      auto id = j.contains("id") ? j.at("id").get<std::string>() : "line-" + std::to_string(n);
      out.push_back({id, graph_from_json(j.contains("graph") ? j.at("graph") : j)});
    } catch (const std::exception& e) {
      throw std::runtime_error(arg + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

struct MotifFlags {
  std::string name;
  std::optional<Timestamp> delta;
  std::string file;

  void add(CLI::App* cmd) {
    auto* m = cmd->add_option("--motif", name, "catalog motif name");
    auto* f = cmd->add_option("--motif-file", file, "JSON motif {name, edge_pattern, time_window}");
    m->excludes(f);
    cmd->add_option("--delta", delta, "time window for a catalog motif")->needs(m);
  }

  MotifPattern get() const {
    if (!file.empty()) return motif_from_json(nlohmann::json::parse(slurp(file)));
    if (name.empty()) throw std::runtime_error("give --motif with --delta, or --motif-file");
    if (!delta) throw std::runtime_error("--motif needs --delta");
    return catalog_motif(name, *delta);
  }
};

void for_each_graph(const std::string& graphs, const std::function<std::string(const DynamicGraph&)>& fn) {
  auto gs = load_graphs(graphs);
  for (const auto& g : gs) std::cout << (gs.size() > 1 ? g.id + ": " : "") << fn(g.graph) << '\n';
}

struct EndpointFlags {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4o-mini";
  std::string key_env = "OPENAI_API_KEY";
  int retries = 3;
  int timeout_s = 120;
  std::optional<int> max_tokens;

  void add(CLI::App* cmd) {
    cmd->add_option("--base-url", base_url, "OpenAI-compatible API root")->capture_default_str();
    cmd->add_option("--model", model)->capture_default_str();
    cmd->add_option("--key-env", key_env, "environment variable holding the API key; empty for none")
        ->capture_default_str();
    cmd->add_option("--retries", retries)->capture_default_str()->check(CLI::NonNegativeNumber);
    cmd->add_option("--timeout", timeout_s, "seconds per request")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--max-tokens", max_tokens);
  }

  EndpointConfig config() const {
    EndpointConfig c;
    c.base_url = base_url;
    c.model = model;
    if (!key_env.empty()) c.api_key = api_key_from_env(key_env);
    c.max_retries = retries;
    c.timeout = std::chrono::seconds(timeout_s);
    c.max_tokens = max_tokens;
    return c;
  }
};

void print_report(const RunReport& r) {
  std::cerr << r.attempted << " attempted, " << r.skipped << " skipped, " << r.errored << " errored of " << r.total
            << '\n';
  std::cout << summary_csv(r.summary);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal motif benchmark toolkit", "tmotif"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tmotif 1.0");

  // generate
  auto* gen = app.add_subcommand("generate", "generate benchmark instances as JSONL");
  std::string g_task, g_motif, g_out;
  std::size_t g_count = 20;
  std::uint64_t g_seed = 0;
  std::optional<std::size_t> g_n, g_m;
  std::optional<double> g_p, g_del;
  std::optional<Timestamp> g_t, g_w;
  gen->add_option("--task", g_task, "task name")->required();
  gen->add_option("--motif", g_motif, "catalog motif (Level 1 tasks)");
  gen->add_option("--count", g_count)->capture_default_str();
  gen->add_option("--seed", g_seed, "base seed")->required();
  gen->add_option("--n", g_n, "node count");
  gen->add_option("--m", g_m, "exact edge count");
  gen->add_option("--p", g_p, "edge probability");
  gen->add_option("--t", g_t, "time span");
  gen->add_option("--w", g_w, "motif time window");
  gen->add_option("--del-prob", g_del, "delete probability");
  gen->add_option("--out", g_out, "output path (default stdout)");

  // single-graph queries
  std::string q_graph;
  MotifFlags q_motif;
  bool q_serial = false;
  auto query = [&](const char* name, const char* help) {
    auto* c = app.add_subcommand(name, help);
    c->add_option("--graph", q_graph, "graph file, JSONL of graphs or instances, '-' or a literal list")->required();
    q_motif.add(c);
    return c;
  };
  auto* det = query("detect", "does the graph contain the motif (Yes/No)");
  auto* cnt = query("count", "number of motif instances");
  cnt->add_flag("--serial", q_serial, "use the single-threaded kernel");
  auto* first = query("first-occurrence", "time the first instance completes");
  auto* cons = query("construct", "one Add event that completes the motif");
  auto* cls = query("classify", "is the whole graph exactly the motif (Yes/No)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "mean motif count over an (N, T, W) grid");
  std::string s_motif, s_out;
  SweepGrid grid;
  bool s_serial = false;
  sweep->add_option("--motif", s_motif)->required();
  sweep->add_option("--n", grid.n, "node counts")->required()->delimiter(',');
  sweep->add_option("--t", grid.t, "time spans")->required()->delimiter(',');
  sweep->add_option("--w", grid.w, "windows")->required()->delimiter(',');
  sweep->add_option("--seeds", grid.seeds, "graphs per cell")->capture_default_str();
  sweep->add_option("--seed", grid.base_seed, "first seed")->required();
  sweep->add_option("--p", grid.p)->capture_default_str();
  sweep->add_option("--del-prob", grid.del_prob)->capture_default_str();
  sweep->add_flag("--serial", s_serial);
  sweep->add_option("--out", s_out);

  // ego-sample
  auto* ego = app.add_subcommand("ego-sample", "sample a small ego graph from a temporal edge file");
  std::string e_edges, e_out;
  EgoOptions e_opts;
  std::optional<NodeId> e_center;
  ego->add_option("--edges", e_edges, "whitespace separated 'u v t' lines")->required();
  ego->add_option("--seed", e_opts.seed)->required();
  ego->add_option("--center", e_center);
  ego->add_option("--hops", e_opts.hops)->capture_default_str();
  ego->add_option("--cap", e_opts.node_cap, "maximum node count")->capture_default_str();
  ego->add_option("--out", e_out);

  // bench run
  auto* bench = app.add_subcommand("bench", "LLM benchmark runs");
  bench->require_subcommand(1);
  auto* brun = bench->add_subcommand("run", "evaluate instances with a direct LLM");
  std::string r_instances, r_out, r_summary, r_strategy = "zero_shot", r_prompts;
  std::size_t r_conc = 4;
  EndpointFlags r_ep;
  brun->add_option("--instances", r_instances)->required();
  brun->add_option("--out", r_out, "JSONL results, appended and resumed")->required();
  brun->add_option("--summary", r_summary, "summary CSV path");
  brun->add_option("--strategy", r_strategy)->capture_default_str();
  brun->add_option("--concurrency", r_conc)->capture_default_str()->check(CLI::PositiveNumber);
  brun->add_option("--prompts", r_prompts, "prompt asset directory");
  r_ep.add(brun);

  // agent run
  auto* agent = app.add_subcommand("agent", "tool-augmented agent");
  agent->require_subcommand(1);
  auto* arun = agent->add_subcommand("run", "evaluate instances with the ReAct agent");
  std::string a_transcripts;
  AgentOptions a_opts;
  arun->add_option("--instances", r_instances)->required();
  arun->add_option("--out", r_out, "JSONL results, appended and resumed")->required();
  arun->add_option("--summary", r_summary, "summary CSV path");
  arun->add_option("--concurrency", r_conc)->capture_default_str()->check(CLI::PositiveNumber);
  arun->add_option("--prompts", r_prompts, "prompt asset directory");
  arun->add_option("--max-steps", a_opts.max_steps)->capture_default_str()->check(CLI::PositiveNumber);
  arun->add_option("--transcripts", a_transcripts, "JSONL of agent transcripts");
  r_ep.add(arun);

  // features
  auto* feat = app.add_subcommand("features", "structural features");
  feat->require_subcommand(1);
  auto* fext = feat->add_subcommand("extract", "features per graph as CSV");
  std::string f_in, f_out;
  fext->add_option("--graph", f_in, "graph file or instance JSONL")->required();
  fext->add_option("--out", f_out);

  // dispatcher
  auto* disp = app.add_subcommand("dispatcher", "difficulty model and routing");
  disp->require_subcommand(1);
  auto* labels = disp->add_subcommand("build-labels", "label instances from direct-run results");
  std::string d_instances, d_results, d_out, d_labels, d_model;
  labels->add_option("--instances", d_instances)->required();
  labels->add_option("--results", d_results, "direct-run JSONL")->required();
  labels->add_option("--out", d_out);

  auto* train = disp->add_subcommand("train", "fit the boosted-tree difficulty model");
  GbdtParams d_params;
  double d_threshold = 0.5;
  std::vector<std::string> d_motifs;
  train->add_option("--labels", d_labels, "label CSV")->required();
  train->add_option("--out", d_out, "model file")->required();
  train->add_option("--seed", d_params.seed)->required();
  train->add_option("--trees", d_params.n_trees)->capture_default_str();
  train->add_option("--depth", d_params.max_depth)->capture_default_str();
  train->add_option("--lr", d_params.learning_rate)->capture_default_str();
  train->add_option("--lambda", d_params.lambda)->capture_default_str();
  train->add_option("--subsample", d_params.subsample)->capture_default_str();
  train->add_option("--holdout", d_params.holdout)->capture_default_str();
  train->add_option("--threshold", d_threshold)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  train->add_option("--motifs", d_motifs, "motifs the labels came from")->delimiter(',');

  auto* route = disp->add_subcommand("route", "route instances; with --execute also solve them");
  std::optional<double> d_theta;
  bool d_execute = false, d_fallback = false;
  route->add_option("--classifier", d_model, "difficulty model file")->required();
  route->add_option("--instances", d_instances)->required();
  route->add_option("--threshold", d_theta)->check(CLI::Range(0.0, 1.0));
  route->add_flag("--execute", d_execute, "call the chosen path for each instance");
  route->add_flag("--fallback", d_fallback, "retry on the other path when the chosen one fails");
  route->add_option("--out", d_out, "routed results JSONL (with --execute)");
  route->add_option("--strategy", r_strategy, "direct-path strategy")->capture_default_str();
  route->add_option("--max-steps", a_opts.max_steps)->capture_default_str()->check(CLI::PositiveNumber);
  route->add_option("--concurrency", r_conc)->capture_default_str()->check(CLI::PositiveNumber);
  route->add_option("--prompts", r_prompts, "prompt asset directory");
  r_ep.add(route);

  // tools serve
  auto* tools = app.add_subcommand("tools", "motif tools over HTTP");
  tools->require_subcommand(1);
  auto* serve = tools->add_subcommand("serve", "serve POST /tools/<name>");
  std::string t_host = "127.0.0.1";
  int t_port = 8765;
  serve->add_option("--host", t_host)->capture_default_str();
  serve->add_option("--port", t_port)->capture_default_str()->check(CLI::Range(0, 65535));

  CLI11_PARSE(app, argc, argv);

  try {
    auto templates = [&] {
      return PromptTemplates::load(r_prompts.empty() ? PromptTemplates::default_dir() : r_prompts);
    };
    auto agent_prompt = [&] {
      return AgentPrompt::load(r_prompts.empty() ? PromptTemplates::default_dir() : r_prompts);
    };

    if (gen->parsed()) {
      BatchRequest req;
      req.task = task_from_string(g_task);
      req.motif = g_motif;
      req.count = g_count;
      if (!is_level0(req.task) && !is_level2(req.task) && g_motif.empty())
        throw std::runtime_error("--task " + g_task + " needs --motif");
      req.params = default_params(req.task, g_motif, g_seed);
      if (g_n) req.params.n = *g_n;
      if (g_m) req.params.m = *g_m;
      if (g_p) req.params.p = *g_p;
      if (g_t) req.params.t_span = *g_t;
      if (g_w) req.params.window = *g_w;
      if (g_del) req.params.del_prob = *g_del;
      req.params.validate();
      emit(g_out, to_jsonl(generate_batch(req)));
    } else if (det->parsed()) {
      auto m = q_motif.get();
      for_each_graph(q_graph, [&](const DynamicGraph& g) { return detect(g, m) ? "Yes" : "No"; });
    } else if (cnt->parsed()) {
      auto m = q_motif.get();
      for_each_graph(q_graph, [&](const DynamicGraph& g) {
        return std::to_string(q_serial ? count_serial(g, m) : count(g, m));
      });
    } else if (first->parsed()) {
      auto m = q_motif.get();
      for_each_graph(q_graph, [&](const DynamicGraph& g) {
        auto t = first_occurrence(g, m);
        return t ? std::to_string(*t) : std::string("none");
      });
    } else if (cons->parsed()) {
      auto m = q_motif.get();
      for_each_graph(q_graph, [&](const DynamicGraph& g) {
        auto c = construct_completion(g, m);
        return c ? format_events({*c}) : std::string("none");
      });
    } else if (cls->parsed()) {
      auto m = q_motif.get();
      for_each_graph(q_graph, [&](const DynamicGraph& g) { return classify_exact(g, m) ? "Yes" : "No"; });
    } else if (sweep->parsed()) {
      catalog_motif(s_motif, 0);
      emit(s_out, sweep_csv(parameter_sweep(s_motif, grid, !s_serial)));
    } else if (ego->parsed()) {
      e_opts.center = e_center;
      auto s = ego_sample(read_edge_file(e_edges), e_opts);
      nlohmann::ordered_json j;
      j["graph"] = serialize_graph(s.graph);
      j["original_ids"] = s.original_ids;
      j["time_offset"] = s.time_offset;
      emit(e_out, j.dump() + "\n");
    } else if (brun->parsed()) {
      auto t = templates();
      auto strategy = strategy_from_string(r_strategy);
      auto cfg = r_ep.config();
      auto instances = read_instances(r_instances);
      RunOptions opts{r_conc, r_out, r_summary};
      print_report(run_benchmark(
          instances,
          [&] { return std::make_unique<DirectSolver>(std::make_unique<HttpChatModel>(cfg), t, strategy); }, opts));
    } else if (arun->parsed()) {
      auto t = templates();
      auto prompt = agent_prompt();
      auto cfg = r_ep.config();
      auto instances = read_instances(r_instances);
      std::mutex log_mu;
      std::ofstream log;
      if (!a_transcripts.empty()) {
        log.open(a_transcripts, std::ios::app);
        if (!log) throw std::runtime_error("cannot open " + a_transcripts);
      }
      RunOptions opts{r_conc, r_out, r_summary};
      print_report(run_benchmark(
          instances,
          [&] {
            auto s = std::make_unique<AgentSolver>(std::make_unique<HttpChatModel>(cfg), t, prompt, a_opts);
            if (log.is_open())
              s->on_episode = [&](const TaskInstance& inst, const AgentResult& r) {
                nlohmann::ordered_json j;
                j["id"] = inst.id;
                j["transcript"] = transcript_json(r);
                std::lock_guard lock(log_mu);
                log << j.dump() << '\n' << std::flush;
              };
            return s;
          },
          opts));
    } else if (fext->parsed()) {
      std::string csv = "id";
      for (auto* n : feature_names()) csv += std::string(",") + n;
      csv += '\n';
      char buf[32];
      for (const auto& g : load_graphs(f_in)) {
        auto f = extract_features(g.graph);
        csv += g.id + ',' + std::to_string(f.num_edges) + ',' + std::to_string(f.cyclomatic);
        for (double v : {f.ratio_eq_2, f.ratio_ge_3, f.edge_locality}) {
          std::snprintf(buf, sizeof buf, ",%.6f", v);
          csv += buf;
        }
        csv += '\n';
      }
      emit(f_out, csv);
    } else if (labels->parsed()) {
      auto ds = build_label_dataset(read_instances(d_instances), read_records(d_results));
      if (ds.skipped) std::cerr << ds.skipped << " instances without a usable result were skipped\n";
      emit(d_out, label_csv(ds.rows));
    } else if (train->parsed()) {
      auto rep = train_classifier(parse_label_csv(slurp(d_labels)), d_params);
      rep.model.threshold = d_threshold;
      rep.model.motifs = d_motifs;
      rep.model.save_file(d_out);
      std::printf("train %zu rows, accuracy %.4f\n", rep.n_train, rep.train_accuracy);
      if (rep.n_holdout) std::printf("holdout %zu rows, accuracy %.4f\n", rep.n_holdout, rep.holdout_accuracy);
    } else if (route->parsed()) {
      auto model = DifficultyModel::load_file(d_model);
      auto policy = model_policy(model, d_theta);
      auto instances = read_instances(d_instances);
      if (!d_execute) {
        std::cout << "id,p_hard,route\n";
        for (const auto& inst : instances) {
          auto d = policy(inst);
          std::printf("%s,%.6f,%s\n", inst.id.c_str(), d.p_hard, to_string(d.route).c_str());
        }
      } else {
        auto t = templates();
        auto prompt = agent_prompt();
        auto strategy = strategy_from_string(r_strategy);
        auto cfg = r_ep.config();
        RouteOptions opts{d_fallback, r_conc, d_out};
        auto recs = route_benchmark(
            instances, policy,
            [&] { return std::make_unique<DirectSolver>(std::make_unique<HttpChatModel>(cfg), t, strategy); },
            [&] { return std::make_unique<AgentSolver>(std::make_unique<HttpChatModel>(cfg), t, prompt, a_opts); },
            opts);
        auto s = summarize_routes(recs);
        std::printf("instances,to_agent,errored,accuracy,avg_tokens\n%zu,%zu,%zu,%.4f,%.1f\n", s.n, s.to_agent,
                    s.errored, s.accuracy, s.avg_tokens);
      }
    } else if (serve->parsed()) {
      ToolServer server;
      int port = server.bind(t_host, t_port);
      std::cerr << "serving tools on http://" << t_host << ':' << port << "/tools\n";
      server.listen();
    }
  } catch (const std::exception& e) {
    std::cerr << "tmotif: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
