#include "phonosearch/bench.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "phonosearch/database.hpp"
#include "phonosearch/errors.hpp"
#include "phonosearch/phonetic.hpp"

namespace phonosearch::bench {

std::uint64_t Rng::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % bound;
}

const Pools& default_pools() {
  static const Pools pools{
      // given names
      {"Abdullah", "Rahim",    "Karim",    "Rahman",   "Hossain",  "Hasan",    "Ahmed",    "Islam",
       "Ali",      "Kamal",    "Jamal",    "Faruk",    "Anwar",    "Aminul",   "Nurul",    "Shafiqul",
       "Rafiqul",  "Mizanur",  "Habibur",  "Saiful",   "Shahidul", "Zahid",    "Tanvir",   "Palash",
       "Delowar",  "Masud",    "Shahin",   "Shamim",   "Sumon",    "Rubel",    "Liton",    "Babul",
       "Jewel",    "Sohel",    "Sabbir",   "Rasel",    "Rana",     "Rony",     "Fatema",   "Ayesha",
       "Rokeya",   "Nasrin",   "Shirin",   "Jannat",   "Farzana",  "Tahmina",  "Sharmin",  "Rupa",
       "Mitu",     "Nusrat",   "Nishat",   "Tasnim",   "Sadia",    "Sumaiya",  "Mahfuza",  "Munira",
       "Rehana",   "Rahima",   "Hasina",   "Khaleda",  "Shefali",  "Tania",    "Moushumi", "Shapla",
       "Rajib",    "Sajib",    "Sakib",    "Tamim",    "Nasir",    "Subrata",  "Swapan",   "Tapan",
       "Ratan",    "Gopal",    "Mahbub",   "Kabir",    "Alamgir",  "Mostafa",  "Rashid",   "Ibtihal"},
      // surnames
      {"Uddin",  "Khan",    "Chowdhury", "Siddique", "Talukder", "Sarkar",   "Mondal", "Biswas",
       "Sheikh", "Mia",     "Molla",     "Bhuiyan",  "Akter",    "Begum",    "Khatun", "Sultana",
       "Haque",  "Mahmud",  "Alam",      "Kabir",    "Rahman",   "Hossain",  "Islam",  "Ahmed",
       "Das",    "Roy",     "Saha",      "Paul",     "Dey",      "Ghosh",    "Barua",  "Chakma"},
      // districts
      {{"Dhaka", "Dhaka"},
       {"Faridpur", "Dhaka"},
       {"Gazipur", "Dhaka"},
       {"Gopalganj", "Dhaka"},
       {"Kishoreganj", "Dhaka"},
       {"Madaripur", "Dhaka"},
       {"Manikganj", "Dhaka"},
       {"Munshiganj", "Dhaka"},
       {"Narayanganj", "Dhaka"},
       {"Narsingdi", "Dhaka"},
       {"Rajbari", "Dhaka"},
       {"Shariatpur", "Dhaka"},
       {"Tangail", "Dhaka"},
       {"Bandarban", "Chattogram"},
       {"Brahmanbaria", "Chattogram"},
       {"Chandpur", "Chattogram"},
       {"Chattogram", "Chattogram"},
       {"Cumilla", "Chattogram"},
       {"Coxsbazar", "Chattogram"},
       {"Feni", "Chattogram"},
       {"Khagrachari", "Chattogram"},
       {"Lakshmipur", "Chattogram"},
       {"Noakhali", "Chattogram"},
       {"Rangamati", "Chattogram"},
       {"Bogura", "Rajshahi"},
       {"Chapainawabganj", "Rajshahi"},
       {"Joypurhat", "Rajshahi"},
       {"Naogaon", "Rajshahi"},
       {"Natore", "Rajshahi"},
       {"Pabna", "Rajshahi"},
       {"Rajshahi", "Rajshahi"},
       {"Sirajganj", "Rajshahi"},
       {"Bagerhat", "Khulna"},
       {"Chuadanga", "Khulna"},
       {"Jashore", "Khulna"},
       {"Jhenaidah", "Khulna"},
       {"Khulna", "Khulna"},
       {"Kushtia", "Khulna"},
       {"Magura", "Khulna"},
       {"Meherpur", "Khulna"},
       {"Narail", "Khulna"},
       {"Satkhira", "Khulna"},
       {"Barguna", "Barisal"},
       {"Barisal", "Barisal"},
       {"Bhola", "Barisal"},
       {"Jhalokati", "Barisal"},
       {"Patuakhali", "Barisal"},
       {"Pirojpur", "Barisal"},
       {"Habiganj", "Sylhet"},
       {"Moulvibazar", "Sylhet"},
       {"Sunamganj", "Sylhet"},
       {"Sylhet", "Sylhet"},
       {"Dinajpur", "Rangpur"},
       {"Gaibandha", "Rangpur"},
       {"Kurigram", "Rangpur"},
       {"Lalmonirhat", "Rangpur"},
       {"Nilphamari", "Rangpur"},
       {"Panchagarh", "Rangpur"},
       {"Rangpur", "Rangpur"},
       {"Thakurgaon", "Rangpur"},
       {"Jamalpur", "Mymensingh"},
       {"Mymensingh", "Mymensingh"},
       {"Netrokona", "Mymensingh"},
       {"Sherpur", "Mymensingh"}},
      // upazilas
      {"Haimchar",  "Savar",     "Dhamrai",    "Keraniganj", "Birganj",    "Biral",     "Bochaganj", "Fulbari",
       "Ghoraghat", "Hakimpur",  "Khansama",   "Parbatipur", "Bheramara",  "Daulatpur", "Kumarkhali", "Bhaluka",
       "Trishal",   "Gafargaon", "Muktagachha", "Phulpur",   "Haluaghat",  "Nandail",   "Sreepur",   "Kaliakair",
       "Kapasia",   "Kaliganj",  "Shibganj",   "Godagari",   "Charghat",   "Durgapur",  "Puthia",    "Tanore",
       "Paikgachha", "Dumuria",  "Batiaghata", "Dacope",     "Koyra",      "Rupsha",    "Phultala",  "Agailjhara",
       "Babuganj",  "Gournadi",  "Hizla",      "Mehendiganj", "Muladi",    "Wazirpur",  "Jaintiapur", "Kanaighat",
       "Zakiganj",  "Golapganj", "Balaganj",   "Bishwanath", "Gowainghat", "Badarganj", "Gangachara", "Kaunia",
       "Mithapukur", "Pirgachha", "Taraganj",  "Ullapara",   "Shahjadpur", "Belkuchi",  "Kazipur",   "Teknaf",
       "Ukhia",     "Ramu",      "Chakaria",   "Kutubdia",   "Sitakunda",  "Mirsharai", "Hathazari", "Raozan",
       "Rangunia",  "Boalkhali", "Patiya",     "Anwara",     "Banshkhali", "Satkania",  "Lohagara",  "Fatikchhari"},
      // unions
      {"Naikhong",  "Arpangashia", "Kabai",    "Gazirhat",   "Baliakandi", "Charbhadrasan", "Nolchity", "Amtali",
       "Kalapara",  "Latachapli",  "Mohipur",  "Dhankhali",  "Chakamaiya", "Baliatali",     "Nilganj",  "Tiakhali",
       "Lalua",     "Mithaganj",   "Dhulasar", "Champapur",  "Rangabali",  "Chalitabunia",  "Barabaisdia", "Chhoto",
       "Sonatola",  "Mohishkhola", "Fulchari", "Kanchipara", "Erendabari", "Udakhali",      "Uria",     "Balashi",
       "Ratanpur",  "Shyampur",    "Jaliapara", "Hatikumrul", "Brahmagacha", "Dhamainagar",  "Chandaikona", "Nalka"},
      // villages
      {"Gorea",      "Rabglipara", "Kalaparaipa", "Noapara",    "Boropara",   "Kazipara",  "Mollapara",  "Mistripara",
       "Dakshinpara", "Uttarpara", "Purbapara",  "Paschimpara", "Char Kukri", "Baliadanga", "Shibpur",   "Ramnagar",
       "Krishnapur", "Gopalpur",   "Madhupur",   "Rasulpur",   "Fatehpur",   "Hajiganj",  "Bhabanipur", "Mohammadpur",
       "Islampur",   "Sonapur",    "Rupnagar",   "Kashipur",   "Debipur",    "Kamalpur",  "Nayagram",   "Hatibandha",
       "Jugitola",   "Banglabazar", "Amtola",    "Kathaltola", "Bottola",    "Kolatoli",  "Dighirpar",  "Pukurpar"},
      // occupations
      {"Farmer", "Employee", "Student", "Teacher", "Business", "Housewife", "Driver", "Fisherman", "Doctor",
       "Engineer", "Tailor", "Labourer", "Shopkeeper", "Rickshaw Puller", "Nurse", "Retired"},
      // syllables: consonant-vowel pairs whose consonants encode unambiguously
      {"ba", "bi", "bo", "bu", "da", "di", "do", "du", "fa", "fi", "fo", "fu", "ka", "ki", "ko", "ku",
       "la", "li", "lo", "lu", "ma", "mi", "mo", "mu", "na", "ni", "no", "nu", "pa", "pi", "po", "pu",
       "ra", "ri", "ro", "ru", "sa", "si", "so", "su", "ta", "ti", "to", "tu", "sha", "shi", "sho", "shu"},
  };
  return pools;
}

namespace {

template <typename T>
const T& pick(const std::vector<T>& pool, Rng& rng) {
  return pool[rng.below(pool.size())];
}

std::string capitalized(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

}  // namespace

std::string rare_name(Rng& rng, const Pools& pools) {
  // Codes of every pooled word. A synthesized name never shares one, so its
  // posting lists stay short however large the corpus grows.
  static const std::unordered_set<std::string> taken = [] {
    std::unordered_set<std::string> out;
    const Pools& p = default_pools();
    auto add = [&](std::string_view text) {
      for (const auto& word : phonetic::tokenize(text)) {
        const auto codes = phonetic::encode(word);
        out.emplace(codes.primary.key());
        out.emplace(codes.secondary.key());
      }
    };
    for (const auto* pool : {&p.given_names, &p.surnames, &p.upazilas, &p.unions, &p.villages, &p.occupations}) {
      for (auto w : *pool) add(w);
    }
    for (const auto& d : p.districts) add(d.name);
    return out;
  }();
  const bool check = &pools == &default_pools();
  while (true) {
    std::string name;
    for (int i = 0; i < 4; ++i) name += pick(pools.syllables, rng);
    name = capitalized(std::move(name));
    if (!check) return name;
    const auto codes = phonetic::encode(*phonetic::normalize(name));
    if (!taken.contains(std::string(codes.primary.key())) && !taken.contains(std::string(codes.secondary.key()))) return name;
  }
}

std::string misspell(std::string_view word, Rng& rng) {
  std::string out(word);
  if (out.size() < 3) return out;
  const std::size_t i = 1 + rng.below(out.size() - 2);
  if (rng.below(2) == 0) {
    out.erase(i, 1);
  } else {
    std::swap(out[i], out[i + 1]);
  }
  return out;
}

CorpusGenerator::CorpusGenerator(CorpusSpec spec, const Pools& pools)
    : spec_(spec), pools_(pools), rng_(spec.seed) {
  if (pools_.given_names.empty() || pools_.surnames.empty() || pools_.districts.empty() ||
      pools_.upazilas.empty() || pools_.unions.empty() || pools_.villages.empty() ||
      pools_.occupations.empty() || pools_.syllables.empty()) {
    throw ConfigError("corpus pools must be non-empty");
  }
}

std::vector<std::string> CorpusGenerator::next() {
  if (done()) throw ValidationError("corpus exhausted");
  ++produced_;
  std::string name = rng_.chance(spec_.rare_name_percent) ? rare_name(rng_, pools_)
                                                          : std::string(pick(pools_.given_names, rng_));
  if (rng_.chance(spec_.surname_percent)) {
    name += ' ';
    name += pick(pools_.surnames, rng_);
  }
  const District& district = pick(pools_.districts, rng_);
  std::string phone = "8801";
  for (int i = 0; i < 9; ++i) phone.push_back(static_cast<char>('0' + rng_.below(10)));
  return {std::move(name),
          std::string(district.division),
          std::string(district.name),
          std::string(pick(pools_.upazilas, rng_)),
          std::string(pick(pools_.unions, rng_)),
          std::string(pick(pools_.villages, rng_)),
          std::string(pick(pools_.occupations, rng_)),
          std::move(phone)};
}

std::vector<std::vector<std::string>> generate(const CorpusSpec& spec) {
  std::vector<std::vector<std::string>> out;
  out.reserve(spec.record_count);
  CorpusGenerator generator(spec);
  while (!generator.done()) out.push_back(generator.next());
  return out;
}

std::string_view to_string(QueryKind kind) {
  switch (kind) {
    case QueryKind::kSelective:
      return "selective";
    case QueryKind::kBroad:
      return "broad";
    case QueryKind::kMisspelled:
      return "misspelled";
  }
  return "?";
}

std::vector<BenchQuery> make_queries(const std::vector<std::vector<std::string>>& corpus, std::size_t count,
                                     std::uint64_t seed) {
  std::vector<BenchQuery> out;
  if (corpus.empty()) return out;
  const Pools& pools = default_pools();
  const std::unordered_set<std::string_view> common(pools.given_names.begin(), pools.given_names.end());
  Rng rng(seed ^ 0x5EEDF00DULL);

  auto given_name = [](const std::vector<std::string>& row) { return row[0].substr(0, row[0].find(' ')); };
  // A record with a synthesized name, searching forward from a random start.
  auto rare_record = [&]() -> const std::vector<std::string>& {
    const std::size_t start = rng.below(corpus.size());
    for (std::size_t k = 0; k < corpus.size(); ++k) {
      const auto& row = corpus[(start + k) % corpus.size()];
      if (!common.contains(given_name(row))) return row;
    }
    return corpus[start];
  };

  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto roll = rng.below(100);
    if (roll < 70) {
      const auto& row = rare_record();
      out.push_back({given_name(row) + " " + row[2], QueryKind::kSelective});
    } else if (roll < 90) {
      out.push_back({corpus[rng.below(corpus.size())][2], QueryKind::kBroad});
    } else {
      const auto& row = rare_record();
      out.push_back({misspell(given_name(row), rng) + " " + row[2], QueryKind::kMisspelled});
    }
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double micros_since(Clock::time_point start) {
  return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
}

bool same_hits(const ResultSet& a, const ResultSet& b) {
  if (a.hits.size() != b.hits.size()) return false;
  for (std::size_t i = 0; i < a.hits.size(); ++i) {
    if (a.hits[i].pointer != b.hits[i].pointer || a.hits[i].score_percent != b.hits[i].score_percent) {
      return false;
    }
  }
  return true;
}

// One corpus size: its database, queries and the counts gathered so far.
struct SizeRun {
  BenchResult result;
  std::unique_ptr<SearchDatabase> db;
  std::vector<Query> queries;
  std::vector<std::vector<double>> samples;
};

SizeRun prepare(std::size_t n, const RunOptions& options) {
  SizeRun run;
  run.result.n = n;
  const auto corpus = generate(CorpusSpec{n, options.seed});

  run.db = std::make_unique<SearchDatabase>();
  const auto build_start = Clock::now();
  for (const auto& row : corpus) run.db->insert(kCitizenTableId, row);
  run.result.build_ms = micros_since(build_start) / 1000.0;

  const auto queries = make_queries(corpus, options.queries, options.seed + n);
  for (const auto& q : queries) run.queries.push_back(Query::parse(q.text, options.limit));

  // Counts and answers come from an untimed pass, which also warms up.
  auto& per_query = run.result.per_query;
  per_query.resize(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    auto& m = per_query[i];
    m.query = queries[i];
    const auto indexed = run.db->search(run.queries[i]);
    const auto linear = run.db->scan(run.queries[i]);
    m.candidates = run.db->candidates(run.queries[i]).pointers.size();
    m.indexed_comparisons = indexed.stats.records_scored;
    m.linear_comparisons = linear.stats.records_scored;
    m.hits = indexed.hits.size();
    m.results_equal = same_hits(indexed, linear);
  }
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto start = Clock::now();
    const auto r = run.db->scan(run.queries[i]);
    per_query[i].linear_us = micros_since(start);
  }
  run.samples.resize(queries.size());
  return run;
}

void timed_pass(SizeRun& run) {
  for (std::size_t i = 0; i < run.queries.size(); ++i) {
    const auto start = Clock::now();
    const auto r = run.db->search(run.queries[i]);
    run.samples[i].push_back(micros_since(start));
  }
}

void summarize(SizeRun& run) {
  BenchResult& result = run.result;
  std::vector<double> latencies;
  for (std::size_t i = 0; i < result.per_query.size(); ++i) {
    auto& m = result.per_query[i];
    m.indexed_us = median(run.samples[i]);
    latencies.push_back(m.indexed_us);
    result.indexed_mean_us += m.indexed_us;
    result.linear_mean_us += m.linear_us;
    result.mean_candidates += static_cast<double>(m.candidates);
    result.indexed_comparisons += static_cast<double>(m.indexed_comparisons);
    result.linear_comparisons += static_cast<double>(m.linear_comparisons);
    result.dominated += m.indexed_comparisons <= m.linear_comparisons;
    result.strictly_dominated += m.indexed_comparisons < m.linear_comparisons;
    result.equal_results += m.results_equal;
  }
  result.queries = result.per_query.size();
  if (result.queries == 0) return;
  const double q = static_cast<double>(result.queries);
  result.indexed_mean_us /= q;
  result.linear_mean_us /= q;
  result.mean_candidates /= q;
  result.indexed_comparisons /= q;
  result.linear_comparisons /= q;
  std::sort(latencies.begin(), latencies.end());
  result.indexed_median_us = median(latencies);
  // Nearest-rank percentile.
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * q));
  result.indexed_p99_us = latencies[std::max<std::size_t>(rank, 1) - 1];
}

}  // namespace

std::vector<BenchResult> run(const RunOptions& options) {
  if (options.sizes.empty()) throw ValidationError("no corpus sizes given");
  for (std::size_t i = 0; i < options.sizes.size(); ++i) {
    if (options.sizes[i] == 0) throw ValidationError("corpus sizes must be positive");
    if (i > 0 && options.sizes[i] <= options.sizes[i - 1]) throw ValidationError("corpus sizes must ascend");
  }
  std::vector<SizeRun> runs;
  for (std::size_t n : options.sizes) runs.push_back(prepare(n, options));

  // Passes rotate through the sizes so slow spells on a shared machine land
  // on every size alike instead of skewing one of them.
  const std::size_t passes = std::max<std::size_t>(options.indexed_passes, 1);
  for (std::size_t pass = 0; pass < passes; ++pass) {
    for (auto& run : runs) timed_pass(run);
  }

  std::vector<BenchResult> results;
  for (auto& run : runs) {
    summarize(run);
    results.push_back(std::move(run.result));
    run.db.reset();
    if (options.on_result) options.on_result(results.back());
  }
  return results;
}

void write_csv(std::ostream& out, const std::vector<BenchResult>& results) {
  out << "n,indexed_mean_us,linear_mean_us,indexed_comparisons,linear_comparisons\n";
  for (const auto& r : results) {
    out << r.n << ',' << r.indexed_mean_us << ',' << r.linear_mean_us << ',' << r.indexed_comparisons << ','
        << r.linear_comparisons << '\n';
  }
}

void write_gnuplot(std::ostream& out, const std::string& csv_path) {
  out << "set datafile separator ','\n"
         "set title 'Amount of data versus searching time'\n"
         "set xlabel 'records'\n"
         "set ylabel 'mean search time (us)'\n"
         "set logscale xy\n"
         "set key top left\n"
         "set grid\n"
         "set terminal pngcairo size 800,500\n"
         "set output '"
      << csv_path << ".png'\n"
      << "plot '" << csv_path << "' every ::1 using 1:2 with linespoints title 'indexed', \\\n"
      << "     '" << csv_path << "' every ::1 using 1:3 with linespoints title 'linear scan'\n";
}

}  // namespace phonosearch::bench
