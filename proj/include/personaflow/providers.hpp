#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "personaflow/errors.hpp"
#include "personaflow/http.hpp"
#include "personaflow/prompts.hpp"

namespace personaflow {

struct TokenCounts {
  std::int64_t input = 0;
  std::int64_t output = 0;
};

struct Completion {
  std::string text;
  TokenCounts tokens;
};

/// Chat-style text completion. Transport failures throw Error(kIo) (retried by
/// LlmClient); permanent failures throw Error(kProviderError).
class TextProvider {
 public:
  virtual ~TextProvider() = default;
  virtual Completion complete(const PromptBundle& bundle) = 0;
  virtual std::string name() const = 0;
};

/// Image generation. Returns a locator for the stored image.
class ImageProvider {
 public:
  virtual ~ImageProvider() = default;
  virtual std::string generate(const PromptBundle& bundle) = 0;
  virtual std::string name() const = 0;
};

/// Replays recorded completions. One JSON file per key: {stage, key, response_text}.
class MockTextProvider final : public TextProvider {
 public:
  explicit MockTextProvider(const std::filesystem::path& fixture_dir);
  MockTextProvider() = default;

  void add(std::string key, std::string response_text);
  Completion complete(const PromptBundle& bundle) override;
  std::string name() const override { return "mock"; }
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::string> responses_;
};

/// Answers from ordered rules: the first rule whose stage matches and whose
/// `match` text occurs in the user prompt wins. Used to author fixtures.
class ScriptedTextProvider final : public TextProvider {
 public:
  struct Rule {
    Stage stage;
    std::string match;
    std::string response_text;
  };
  explicit ScriptedTextProvider(std::vector<Rule> rules) : rules_(std::move(rules)) {}
  /// Reads [{"stage":..., "match":..., "response": <string or JSON>}].
  static std::vector<Rule> load_rules(const std::filesystem::path& script_file);

  Completion complete(const PromptBundle& bundle) override;
  std::string name() const override { return "scripted"; }

 private:
  std::vector<Rule> rules_;
};

/// Passes calls through and writes each answered bundle as a mock fixture file.
class RecordingTextProvider final : public TextProvider {
 public:
  RecordingTextProvider(std::shared_ptr<TextProvider> inner, std::filesystem::path out_dir);
  Completion complete(const PromptBundle& bundle) override;
  std::string name() const override { return "recording(" + inner_->name() + ")"; }

 private:
  std::shared_ptr<TextProvider> inner_;
  std::filesystem::path out_dir_;
  std::mutex mutex_;
};

struct ChatProviderConfig {
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = "gpt-4o";
  std::string api_key;
  double temperature = 0.2;
  std::chrono::milliseconds timeout{120000};
};

/// OpenAI-compatible /chat/completions client.
class ChatCompletionsProvider final : public TextProvider {
 public:
  ChatCompletionsProvider(std::shared_ptr<HttpTransport> transport, ChatProviderConfig config);
  Completion complete(const PromptBundle& bundle) override;
  std::string name() const override { return "chat:" + config_.model; }

 private:
  std::shared_ptr<HttpTransport> transport_;
  ChatProviderConfig config_;
};

/// Deterministic stand-in for an image model: locator derived from the prompt.
class MockImageProvider final : public ImageProvider {
 public:
  std::string generate(const PromptBundle& bundle) override;
  std::string name() const override { return "mock-image"; }
};

/// Always fails; exercises the avatar fallback.
class FailingImageProvider final : public ImageProvider {
 public:
  std::string generate(const PromptBundle& bundle) override;
  std::string name() const override { return "failing-image"; }
};

struct ProviderCall {
  std::string job_id;
  Stage stage = Stage::kLinkDiscovery;
  bool image = false;
  TokenCounts tokens;
  bool succeeded = false;
  std::chrono::milliseconds latency{0};
  std::string error;
};

struct TokenPrices {
  double input_per_token = 0.0;
  double output_per_token = 0.0;
  double per_image = 0.0;
};

/// Thread-safe record of every provider attempt, retries included.
class CallLedger {
 public:
  void record(ProviderCall call);
  std::vector<ProviderCall> calls() const;
  std::vector<ProviderCall> calls_for(const std::string& job_id) const;
  std::size_t text_calls(const std::string& job_id) const;
  std::size_t image_calls(const std::string& job_id) const;
  double cost(const TokenPrices& prices, const std::string& job_id = {}) const;
  void clear();

 private:
  mutable std::mutex mutex_;
  std::vector<ProviderCall> calls_;
};

struct RetryPolicy {
  int transport_retries = 1;  // extra attempts after a transport failure
  int repair_attempts = 1;    // re-asks after an unparseable answer
};

/// Provider front door used by the engines: retry policy, concurrency cap and
/// call accounting attributed to a job id.
class LlmClient {
 public:
  LlmClient(std::shared_ptr<TextProvider> text, std::shared_ptr<ImageProvider> image,
            std::shared_ptr<CallLedger> ledger, RetryPolicy policy = {}, int max_concurrency = 4);

  bool has_text_provider() const { return static_cast<bool>(text_); }
  bool has_image_provider() const { return static_cast<bool>(image_); }

  /// Raw completion text. Throws kProviderError once retries are exhausted.
  std::string complete(const PromptBundle& bundle, const std::string& job_id);

  /// Completes and parses; an unparseable answer triggers the repair re-ask.
  template <typename Parse>
  auto complete_parsed(const PromptBundle& bundle, const std::string& job_id, Parse&& parse)
      -> decltype(parse(std::string{})) {
    auto current = bundle;
    for (int attempt = 0;; ++attempt) {
      const auto raw = complete(current, job_id);
      try {
        return parse(raw);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kParseError || attempt >= policy_.repair_attempts) throw;
        current = with_repair_instruction(bundle);
      }
    }
  }

  /// Image locator. Throws kProviderError on failure (no retry).
  std::string generate_image(const PromptBundle& bundle, const std::string& job_id);

  const std::shared_ptr<CallLedger>& ledger() const { return ledger_; }

 private:
  std::shared_ptr<TextProvider> text_;
  std::shared_ptr<ImageProvider> image_;
  std::shared_ptr<CallLedger> ledger_;
  RetryPolicy policy_;
  std::counting_semaphore<64> slots_;
};

}  // namespace personaflow
