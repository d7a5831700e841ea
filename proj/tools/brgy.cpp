// brgy: command-line front end for the barangay information service.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "brgy/service.hpp"

using namespace brgy;

namespace {

struct Overrides {
  std::string data_dir;
  std::string zones;
  std::string bind;
};

Config load_config(const Overrides& o) {
  auto c = Config::from_env();
  if (!o.data_dir.empty()) c.data_dir = o.data_dir;
  if (!o.zones.empty()) c.zones_file = o.zones;
  if (!o.bind.empty()) std::tie(c.host, c.port) = parse_bind_addr(o.bind);
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot read " + path, {{"path", path}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidField, "cannot write " + out, {{"path", out}});
  f << text;
}

DateWindow window_from(const std::string& from, const std::string& to) {
  DateWindow w;
  if (!from.empty()) {
    w.from = parse_date(from);
    if (!w.from) throw Error(ErrorCode::InvalidField, "--from: expected YYYY-MM-DD");
  }
  if (!to.empty()) {
    w.to = parse_date(to);
    if (!w.to) throw Error(ErrorCode::InvalidField, "--to: expected YYYY-MM-DD");
  }
  return w;
}

int serve(const Config& config) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  System sys(config);
  HttpService http(sys);
  int port = http.bind(config.host, config.port);
  std::printf("listening on %s:%d\n", config.host.c_str(), port);
  std::fflush(stdout);

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    http.stop();
  });
  http.run();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

std::map<std::string, std::string> parse_features(const std::vector<std::string>& items) {
  std::map<std::string, std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string pair;
    while (std::getline(ss, pair, ',')) {
      if (trim(pair).empty()) continue;
      auto eq = pair.find('=');
      if (eq == std::string::npos)
        throw Error(ErrorCode::InvalidField, "features are written name=value", {{"feature", pair}});
      out[trim(pair.substr(0, eq))] = trim(pair.substr(eq + 1));
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Barangay records, mapping, analytics and open data service"};
  app.require_subcommand(1);
  Overrides ov;
  app.add_option("--data-dir", ov.data_dir, "Data directory (default: $DATA_DIR or ./data)");
  app.add_option("--zones", ov.zones, "Zone polygon file (default: $ZONES_FILE or ./zones.json)");

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  serve_cmd->add_option("--bind", ov.bind, "host:port (default: $BIND_ADDR or 127.0.0.1:8080)");

  std::string residents_csv, blotter_csv;
  auto* import_cmd = app.add_subcommand("import", "Import records from CSV");
  import_cmd->add_option("--residents", residents_csv, "Resident CSV");
  import_cmd->add_option("--blotter", blotter_csv, "Blotter CSV");

  std::string dataset, from, to, out;
  auto* export_cmd = app.add_subcommand("export", "Write an open-data CSV");
  export_cmd->add_option("--dataset", dataset, "Dataset id")->required();
  export_cmd->add_option("--from", from, "First day (YYYY-MM-DD)");
  export_cmd->add_option("--to", to, "Last day (YYYY-MM-DD)");
  export_cmd->add_option("-o,--out", out, "Output file (default: stdout)");

  std::string task, learner = "nb", model_out;
  std::size_t k = 10;
  std::uint64_t seed = 1;
  analytics::TrainOptions topt;
  auto* train_cmd = app.add_subcommand("train", "Cross-validate and fit a classifier on stored cases");
  train_cmd->add_option("--task", task, "reoffend | offend_by_residency")->required();
  train_cmd->add_option("--learner", learner, "nb | tree")->capture_default_str();
  train_cmd->add_option("-k,--folds", k, "Folds")->capture_default_str();
  train_cmd->add_option("--seed", seed, "Shuffle seed")->capture_default_str();
  train_cmd->add_option("--alpha", topt.alpha, "Laplace smoothing")->capture_default_str();
  train_cmd->add_option("--max-depth", topt.max_depth, "Tree depth limit (0: number of features)");
  train_cmd->add_option("--min-leaf", topt.min_samples_leaf, "Smallest branch a split may leave");
  train_cmd->add_option("--model-out", model_out, "Write the fitted model here");

  std::string csv_file, target = "label";
  auto* eval_cmd = app.add_subcommand("evaluate", "Cross-validate a classifier on an offender CSV");
  eval_cmd->add_option("--csv", csv_file, "Offender CSV")->required();
  eval_cmd->add_option("--target", target, "Label column")->capture_default_str();
  eval_cmd->add_option("--learner", learner, "nb | tree")->capture_default_str();
  eval_cmd->add_option("-k,--folds", k, "Folds")->capture_default_str();
  eval_cmd->add_option("--seed", seed, "Shuffle seed")->capture_default_str();
  eval_cmd->add_option("--alpha", topt.alpha, "Laplace smoothing")->capture_default_str();
  eval_cmd->add_option("--max-depth", topt.max_depth, "Tree depth limit (0: number of features)");
  eval_cmd->add_option("--min-leaf", topt.min_samples_leaf, "Smallest branch a split may leave");
  eval_cmd->add_option("--model-out", model_out, "Also fit on all rows and write the model here");

  std::string model_file;
  std::vector<std::string> features;
  auto* predict_cmd = app.add_subcommand("predict", "Classify one record with a saved model");
  predict_cmd->add_option("--model", model_file, "Model JSON")->required();
  predict_cmd->add_option("features", features, "name=value pairs (comma or space separated)");

  std::string username, password, role;
  auto* adduser_cmd = app.add_subcommand("adduser", "Create an officer or public account");
  adduser_cmd->add_option("--username", username)->required();
  adduser_cmd->add_option("--password", password)->required();
  adduser_cmd->add_option("--role", role, "secretary | treasurer | health_worker | lgu | resident_public")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) return serve(load_config(ov));

    if (*import_cmd) {
      if (residents_csv.empty() && blotter_csv.empty())
        throw Error(ErrorCode::InvalidField, "nothing to import: pass --residents and/or --blotter");
      System sys(load_config(ov));
      json report = json::object();
      if (!residents_csv.empty()) {
        auto regs = sys.registry.import_csv(slurp(residents_csv));
        json ids = json::array();
        std::size_t dupes = 0;
        for (const auto& r : regs) {
          ids.push_back(r.resident_id);
          dupes += r.duplicate_warning;
        }
        report["residents"] = {{"imported", regs.size()}, {"duplicate_warnings", dupes}, {"ids", ids}};
      }
      if (!blotter_csv.empty()) {
        auto cases = sys.casework.import_csv(slurp(blotter_csv));
        report["blotter"] = {{"imported", cases.size()}};
      }
      std::cout << report.dump(2) << "\n";
      return 0;
    }

    if (*export_cmd) {
      System sys(load_config(ov));
      emit(sys.export_dataset(dataset, window_from(from, to)), out);
      return 0;
    }

    auto parsed_learner = analytics::parse_learner(learner);
    if ((*train_cmd || *eval_cmd) && !parsed_learner)
      throw Error(ErrorCode::InvalidField, "--learner: expected nb or tree");

    if (*train_cmd) {
      auto t = analytics::parse_task(task);
      if (!t) throw Error(ErrorCode::InvalidField, "--task: expected reoffend or offend_by_residency");
      System sys(load_config(ov));
      auto result = sys.train(*t, *parsed_learner, k, seed, topt);
      if (!model_out.empty()) emit(result.model.dump(2) + "\n", model_out);
      std::cout << analytics::to_json(result.report).dump(2) << "\n";
      return 0;
    }

    if (*eval_cmd) {
      auto data = analytics::load_offender_csv(slurp(csv_file), target);
      auto report = analytics::cross_validate(data, *parsed_learner, k, seed, topt);
      if (!model_out.empty()) {
        json model;
        if (*parsed_learner == analytics::Learner::NaiveBayes) {
          model = analytics::to_json(analytics::train_naive_bayes(data, topt.alpha));
        } else {
          int depth = topt.max_depth > 0 ? topt.max_depth : static_cast<int>(data.schema.features.size());
          model = analytics::to_json(analytics::train_decision_tree(data, depth, topt.min_samples_leaf));
        }
        emit(model.dump(2) + "\n", model_out);
      }
      std::cout << analytics::to_json(report).dump(2) << "\n";
      return 0;
    }

    if (*predict_cmd) {
      auto model = json::parse(slurp(model_file));
      auto named = parse_features(features);
      json result;
      if (model.value("type", "") == "naive_bayes") {
        auto nb = analytics::naive_bayes_from_json(model);
        auto post = analytics::nb_posterior(nb, analytics::encode_named(nb.schema, named));
        auto best = std::max_element(post.begin(), post.end()) - post.begin();
        json probs = json::object();
        for (std::size_t c = 0; c < post.size(); ++c) probs[nb.schema.classes[c]] = post[c];
        result = {{"label", nb.schema.classes[static_cast<std::size_t>(best)]}, {"posterior", probs}};
      } else {
        auto tree = analytics::decision_tree_from_json(model);
        auto p = analytics::tree_predict(tree, analytics::encode_named(tree.schema, named));
        json support = json::object();
        for (std::size_t c = 0; c < p.support.size(); ++c) support[tree.schema.classes[c]] = p.support[c];
        result = {{"label", tree.schema.classes[static_cast<std::size_t>(p.label)]}, {"support", support}};
      }
      std::cout << result.dump(2) << "\n";
      return 0;
    }

    if (*adduser_cmd) {
      auto r = parse_role(role);
      if (!r) throw Error(ErrorCode::InvalidField, "--role: unknown role " + role);
      System sys(load_config(ov));
      sys.accounts.create_account(username, password, *r);
      std::cout << fmt::format("created {} ({})\n", username, role);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << fmt::format("error: {}: {}\n", to_string(e.code()), e.what());
    if (!e.details().empty()) std::cerr << e.details().dump() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: INVALID_FIELD: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
