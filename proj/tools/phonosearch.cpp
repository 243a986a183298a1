// Command line front end: encode, search, bench, serve, seed-demo, generate.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <pthread.h>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "phonosearch/bench.hpp"
#include "phonosearch/database.hpp"
#include "phonosearch/errors.hpp"
#include "phonosearch/phonetic.hpp"
#include "phonosearch/service.hpp"

using namespace phonosearch;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

int encode(const std::vector<std::string>& words, std::size_t max_length) {
  for (const auto& word : words) {
    const auto normalized = phonetic::normalize(word);
    if (!normalized) {
      std::cout << upper(word) << "\t\t\n";
      continue;
    }
    const auto codes = phonetic::encode(*normalized, max_length);
    std::cout << normalized->text() << '\t' << codes.primary.str() << '\t' << codes.secondary.str() << '\n';
  }
  return 0;
}

void print_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()));
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      line += row[i];
      if (i + 1 < row.size()) line += std::string(width[i] - row[i].size() + 2, ' ');
    }
    std::cout << line << '\n';
  }
}

int search(const std::string& text, std::size_t limit, int min_score, const std::filesystem::path& data_dir) {
  if (!std::filesystem::is_directory(data_dir)) {
    std::cerr << "no data directory at " << data_dir << "; try `phonosearch seed-demo` first\n";
    return 1;
  }
  DatabaseConfig config;
  config.data_dir = data_dir;
  SearchDatabase db(config);
  const auto result = db.search(Query::parse(text, limit, min_score));
  if (result.no_searchable_terms) {
    std::cerr << "query has no searchable terms\n";
    return 2;
  }

  std::cout << "Search for: " << text << "\n\n";
  std::vector<std::vector<std::string>> rows{{"Serial No.", "Matched Info", "Matched (%)", "More Info"}};
  std::size_t serial = 0;
  for (const auto& hit : result.hits) {
    std::string info;
    for (const auto& field : hit.matched_record.fields) {
      if (field.empty()) continue;
      if (!info.empty()) info += ", ";
      info += field;
    }
    rows.push_back({std::to_string(++serial), info, std::to_string(hit.score_percent), to_string(hit.pointer)});
  }
  print_table(rows);
  std::cout << '\n'
            << result.hits.size() << " hits, " << result.stats.records_scored << " of " << db.size()
            << " records scored\n";
  return 0;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> sizes;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    const auto value = std::stoull(item, &used);
    if (used != item.size()) throw ValidationError("bad size '" + item + "'");
    sizes.push_back(value);
  }
  return sizes;
}

int bench_command(bench::RunOptions options, const std::string& sizes, const std::string& out_path, bool gnuplot) {
  try {
    options.sizes = parse_sizes(sizes);
  } catch (const std::logic_error&) {
    throw ValidationError("--sizes wants comma separated positive integers");
  }
  std::cout << std::left << std::setw(9) << "n" << std::setw(12) << "build ms" << std::setw(14) << "indexed us"
            << std::setw(14) << "linear us" << std::setw(14) << "idx cmp" << std::setw(12) << "lin cmp"
            << "dominated\n";
  options.on_result = [](const bench::BenchResult& r) {
    std::cout << std::left << std::fixed << std::setprecision(1) << std::setw(9) << r.n << std::setw(12)
              << r.build_ms << std::setw(14) << r.indexed_mean_us << std::setw(14) << r.linear_mean_us
              << std::setw(14) << r.indexed_comparisons << std::setw(12) << r.linear_comparisons
              << r.strictly_dominated << '/' << r.queries << '\n'
              << std::flush;
  };
  const auto results = bench::run(options);

  std::ofstream csv(out_path);
  if (!csv) throw StorageError("cannot write " + out_path);
  bench::write_csv(csv, results);
  std::cout << "wrote " << out_path << '\n';

  if (gnuplot) {
    const auto script = std::filesystem::path(out_path).replace_extension(".gp").string();
    std::ofstream gp(script);
    if (!gp) throw StorageError("cannot write " + script);
    bench::write_gnuplot(gp, out_path);
    std::cout << "wrote " << script << '\n';
  }

  if (results.size() >= 2) {
    const auto& lo = results.front();
    const auto& hi = results.back();
    std::cout << std::setprecision(2) << "indexed grew " << hi.indexed_mean_us / lo.indexed_mean_us << "x, linear grew "
              << hi.linear_mean_us / lo.linear_mean_us << "x from n=" << lo.n << " to n=" << hi.n << '\n';
  }
  return 0;
}

int serve(service::ApiConfig config) {
  service::prepare_data_dir(config.data_dir);
  SearchDatabase db(service::database_config(config));
  service::Api api(db, config);
  service::Server server(api);
  server.set_logger([](const std::string& line) { std::cerr << line << '\n'; });
  const int port = server.bind();

  // Signals go to a waiting thread instead of an async handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });

  std::cerr << "serving " << db.size() << " records from " << config.data_dir.string() << " on http://"
            << config.host << ':' << port << (config.api_token ? " (token required for writes)" : "") << '\n';
  server.run();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

// Seven Abdullah rows and two Ibtihal rows, then a generated population.
int seed_demo(const std::filesystem::path& data_dir, std::size_t records, std::uint64_t seed) {
  DatabaseConfig config;
  config.data_dir = data_dir;
  config.durability = Durability::kBuffered;
  SearchDatabase db(config);
  if (db.size() != 0) {
    std::cerr << data_dir << " already holds " << db.size() << " records\n";
    return 1;
  }
  const std::vector<std::string> abdullah{"Abdullah", "Khulna", "Chandpur", "Haimchar",
                                          "Naikhong", "Gorea",  "Employee", "8801700041114"};
  const std::vector<std::string> ibtihal{"Ibtihal",     "Barisal",  "Barguna", "Amtali",
                                         "Arpangashia", "Abdullah", "Student", "8801900000017"};
  for (int i = 0; i < 7; ++i) db.insert(kCitizenTableId, abdullah);
  for (int i = 0; i < 2; ++i) db.insert(kCitizenTableId, ibtihal);
  bench::CorpusGenerator gen({records, seed});
  while (!gen.done()) db.insert(kCitizenTableId, gen.next());
  std::cout << "seeded " << db.size() << " records into " << data_dir.string() << '\n';
  return 0;
}

int generate(std::size_t records, std::uint64_t seed) {
  bench::CorpusGenerator gen({records, seed});
  while (!gen.done()) {
    const auto row = gen.next();
    for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? "\t" : "") << row[i];
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phonetic search over citizen records"};
  app.require_subcommand(1);

  std::vector<std::string> words;
  std::size_t max_length = phonetic::kDefaultMaxCodeLength;
  auto* encode_cmd = app.add_subcommand("encode", "Print Double Metaphone codes");
  encode_cmd->add_option("words", words)->required();
  encode_cmd->add_option("--max-length", max_length, "Code length cap")->check(CLI::Range(1, 64));

  std::string text;
  std::size_t limit = kDefaultResultLimit;
  int min_score = 0;
  std::string data_dir = env_or("DATA_DIR", "data");
  auto* search_cmd = app.add_subcommand("search", "Search the records in a data directory");
  search_cmd->add_option("text", text)->required();
  search_cmd->add_option("--limit", limit)->check(CLI::Range(1, 10000));
  search_cmd->add_option("--min-score", min_score)->check(CLI::Range(0, 100));
  search_cmd->add_option("--data-dir", data_dir)->envname("DATA_DIR");

  bench::RunOptions bench_options;
  std::string sizes = "1000,10000,100000";
  std::string out = "results.csv";
  bool gnuplot = false;
  auto* bench_cmd = app.add_subcommand("bench", "Indexed search against a linear scan");
  bench_cmd->add_option("--sizes", sizes, "Comma separated corpus sizes");
  bench_cmd->add_option("--queries", bench_options.queries)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench_options.seed);
  bench_cmd->add_option("--passes", bench_options.indexed_passes, "Timed passes for the indexed engine")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", out, "CSV output");
  bench_cmd->add_flag("--gnuplot", gnuplot, "Also write a gnuplot script next to the CSV");

  service::ApiConfig api_config;
  std::string bind;
  std::string token;
  std::string web_root;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  serve_cmd->add_option("--bind", bind, "host:port")->envname("BIND_ADDR");
  serve_cmd->add_option("--data-dir", data_dir)->envname("DATA_DIR");
  serve_cmd->add_option("--token", token, "Bearer token for writes")->envname("API_TOKEN");
  serve_cmd->add_option("--default-limit", api_config.default_limit)
      ->envname("DEFAULT_LIMIT")
      ->check(CLI::Range(1, 10000));
  serve_cmd->add_option("--web-root", web_root, "Static files served at /")->envname("WEB_ROOT");
  serve_cmd->add_flag("--search-requires-token", api_config.search_requires_token);

  std::size_t records = 1000;
  std::uint64_t seed = 42;
  auto* seed_cmd = app.add_subcommand("seed-demo", "Fill an empty data directory with demo records");
  seed_cmd->add_option("--data-dir", data_dir)->envname("DATA_DIR");
  seed_cmd->add_option("--records", records, "Generated records on top of the nine fixed ones");
  seed_cmd->add_option("--seed", seed);

  auto* generate_cmd = app.add_subcommand("generate", "Print a synthetic corpus as TSV");
  generate_cmd->add_option("--records", records);
  generate_cmd->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*encode_cmd) return encode(words, max_length);
    if (*search_cmd) return search(text, limit, min_score, data_dir);
    if (*bench_cmd) return bench_command(bench_options, sizes, out, gnuplot);
    if (*serve_cmd) {
      if (!bind.empty()) service::parse_bind_address(bind, api_config);
      api_config.data_dir = data_dir;
      if (!token.empty()) api_config.api_token = token;
      if (!web_root.empty()) {
        api_config.web_root = web_root;
      } else if (std::filesystem::is_directory(PHONOSEARCH_WEB_ROOT)) {
        api_config.web_root = PHONOSEARCH_WEB_ROOT;
      }
      return serve(api_config);
    }
    if (*seed_cmd) return seed_demo(data_dir, records, seed);
    if (*generate_cmd) return generate(records, seed);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
