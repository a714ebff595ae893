#include <doctest.h>

#include <algorithm>
#include <random>

#include "personaflow/corpus_builder.hpp"
#include "personaflow/errors.hpp"
#include "personaflow/fixture_host.hpp"
#include "support.hpp"

using namespace personaflow;

namespace {

class MapTransport final : public HttpTransport {
 public:
  std::map<std::string, std::string> pages;
  HttpResponse send(const HttpRequest& request) override {
    HttpResponse r;
    auto it = pages.find(request.url);
    if (it == pages.end()) {
      r.status = 404;
      return r;
    }
    r.status = 200;
    r.headers["content-type"] = "text/html";
    r.body = it->second;
    return r;
  }
};

LinkPlan::Link link(SourceKind kind, std::string locator, int priority) {
  LinkPlan::Link l;
  l.kind = kind;
  l.locator = std::move(locator);
  l.priority = priority;
  return l;
}

/// Exhaustive reference: among all size-k index subsets pick the one with the
/// largest priority sum, earliest indices on ties, listed by priority then index.
std::vector<std::size_t> brute_force_select(const std::vector<int>& priorities, std::size_t k) {
  const auto n = priorities.size();
  k = std::min(k, n);
  std::vector<std::size_t> best;
  int best_sum = -1;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
    std::vector<std::size_t> chosen;
    int sum = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        chosen.push_back(i);
        sum += priorities[i];
      }
    if (sum > best_sum || (sum == best_sum && chosen < best)) {
      best_sum = sum;
      best = chosen;
    }
  }
  std::stable_sort(best.begin(), best.end(), [&](auto a, auto b) { return priorities[a] > priorities[b]; });
  return best;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("html to text drops scripts, styles and navigation") {
    const auto text = html_to_text(
        "<html><head><style>p{color:red}</style><script>var x = 1;</script></head><body>"
        "<nav><a href='/'>Home</a><a href='/docs'>Docs</a></nav>"
        "<main><h1>Sheet music, organized</h1><p>Upload your scores &amp; share them with students.</p></main>"
        "<footer>Copyright</footer></body></html>");
    CHECK(text.find("Sheet music, organized") != std::string::npos);
    CHECK(text.find("Upload your scores & share them") != std::string::npos);
    CHECK(text.find("var x") == std::string::npos);
    CHECK(text.find("color:red") == std::string::npos);
  }

  TEST_CASE("character counting and truncation respect code points") {
    const std::string s = "a\xC3\xA9\xE2\x82\xAC" "b";  // a é € b
    CHECK(count_chars(s) == 4);
    CHECK(truncate_chars(s, 2) == "a\xC3\xA9");
    CHECK(truncate_chars(s, 10) == s);
  }

  TEST_CASE("link selection keeps the five highest priorities") {
    LinkPlan plan;
    const std::vector<int> pr = {5, 5, 4, 3, 3, 2, 1};
    plan.internal = {link(SourceKind::kInternalLink, "i0", pr[0]), link(SourceKind::kInternalLink, "i1", pr[3]),
                     link(SourceKind::kInternalLink, "i2", pr[6])};
    plan.external = {link(SourceKind::kExternalLink, "e0", pr[1]), link(SourceKind::kExternalLink, "e1", pr[2]),
                     link(SourceKind::kExternalLink, "e2", pr[4]), link(SourceKind::kExternalLink, "e3", pr[5])};
    const auto got = select_links(plan, 5);
    std::vector<std::string> names;
    for (const auto& l : got) names.push_back(l.locator);
    CHECK(names == std::vector<std::string>{"i0", "e0", "e1", "i1", "e2"});
  }

  TEST_CASE("link selection agrees with exhaustive search") {
    std::mt19937 rng(11);
    for (int round = 0; round < 300; ++round) {
      const std::size_t n = rng() % 9;
      const std::size_t split = n == 0 ? 0 : rng() % (n + 1);
      std::vector<int> pr;
      LinkPlan plan;
      for (std::size_t i = 0; i < n; ++i) {
        pr.push_back(1 + static_cast<int>(rng() % 5));
        auto l = link(i < split ? SourceKind::kInternalLink : SourceKind::kExternalLink, std::to_string(i), pr.back());
        (i < split ? plan.internal : plan.external).push_back(l);
      }
      const std::size_t k = rng() % 7;
      const auto want = brute_force_select(pr, k);
      const auto got = select_links(plan, k);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].locator == std::to_string(want[i]));
    }
  }

  TEST_CASE("caps truncate documents and drop what does not fit") {
    ResourceCorpus c;
    for (int i = 0; i < 4; ++i) {
      ResourceDocument d;
      d.locator = "d" + std::to_string(i);
      d.content_text = std::string(100, 'x');
      c.documents.push_back(d);
    }
    CorpusLimits limits;
    limits.per_document_chars = 60;
    limits.total_chars = 150;
    apply_caps(c, limits);
    REQUIRE(c.documents.size() == 3);
    CHECK(c.documents[0].content_text.size() == 60);
    CHECK(c.documents[2].content_text.size() == 30);
    CHECK(c.total_chars == 150);
    CHECK(c.truncated);
    CHECK(c.warnings.size() == 1);
  }

  TEST_CASE("build fetches internal and external links and reports dead ones") {
    auto host = std::make_shared<FixtureHost>(pftest::kFixtures / "host");
    auto connector = std::make_shared<RepoConnector>(std::make_shared<FixtureTransport>(host), ConnectorConfig{},
                                                     std::make_shared<RateBudget>(1000, 1000));
    auto web = std::make_shared<MapTransport>();
    web->pages["https://a.example/"] = "<p>Alpha page text for readers.</p>";
    web->pages["https://b.example/"] = "<p>Beta page text for readers.</p>";
    web->pages["https://c.example/"] = "<p>Gamma page text for readers.</p>";
    web->pages["https://d.example/"] = "<p>Delta page text for readers.</p>";
    CorpusBuilder builder(connector, web);
    const auto ref = connector->fetch_repo(pftest::kSheetAble);
    const auto readme = connector->fetch_readme(ref);
    LinkPlan plan;
    plan.internal = {link(SourceKind::kInternalLink, "docs/INSTALL.md", 4)};
    plan.external = {link(SourceKind::kExternalLink, "https://a.example/", 5),
                     link(SourceKind::kExternalLink, "https://b.example/", 3),
                     link(SourceKind::kExternalLink, "https://dead.example/", 3),
                     link(SourceKind::kExternalLink, "https://c.example/", 2),
                     link(SourceKind::kExternalLink, "https://d.example/", 1)};
    ResourceDocument user;
    user.source_kind = SourceKind::kUserProvided;
    user.locator = "user";
    user.content_text = "Extra context";
    const auto corpus = builder.build(ref, readme, plan, {user});
    // readme, user doc, then 4 of the 5 selected links (one is dead).
    REQUIRE(corpus.documents.size() == 6);
    CHECK(corpus.documents[0].source_kind == SourceKind::kReadme);
    CHECK(corpus.documents[1].source_kind == SourceKind::kUserProvided);
    CHECK(corpus.documents[2].locator == "https://a.example/");
    CHECK(corpus.documents[3].locator == "docs/INSTALL.md");
    CHECK(corpus.documents[5].locator == "https://c.example/");
    REQUIRE(corpus.warnings.size() == 1);
    CHECK(corpus.warnings[0].find("dead.example") != std::string::npos);
  }

  TEST_CASE("empty corpus is an error") {
    auto host = std::make_shared<FixtureHost>(pftest::kFixtures / "host");
    auto connector = std::make_shared<RepoConnector>(std::make_shared<FixtureTransport>(host), ConnectorConfig{},
                                                     std::make_shared<RateBudget>(1000, 1000));
    CorpusBuilder builder(connector, std::make_shared<MapTransport>());
    RepositoryRef ref;
    ref.owner = "octo-org";
    ref.name = "empty";
    try {
      builder.build(ref, std::nullopt, {}, {});
      FAIL("expected EmptyCorpus");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kEmptyCorpus);
    }
  }
}
