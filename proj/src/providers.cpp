#include "personaflow/providers.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "personaflow/errors.hpp"

namespace personaflow {

namespace fs = std::filesystem;

namespace {

std::int64_t estimate_tokens(std::string_view text) { return static_cast<std::int64_t>((text.size() + 3) / 4); }

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string file_name_for(const std::string& key) {
  std::string out;
  for (char c : key) out.push_back(c == ':' ? '-' : c);
  return out + ".json";
}

}  // namespace

// ---------------------------------------------------------------------------

MockTextProvider::MockTextProvider(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "fixture directory not found: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    Json j;
    try {
      j = Json::parse(read_all(entry.path()));
      responses_[j.at("key").get<std::string>()] = j.at("response_text").get<std::string>();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kIo, "bad fixture " + entry.path().string() + ": " + e.what());
    }
  }
}

void MockTextProvider::add(std::string key, std::string response_text) {
  std::lock_guard lock(mutex_);
  responses_[std::move(key)] = std::move(response_text);
}

std::size_t MockTextProvider::size() const {
  std::lock_guard lock(mutex_);
  return responses_.size();
}

Completion MockTextProvider::complete(const PromptBundle& bundle) {
  std::lock_guard lock(mutex_);
  const auto it = responses_.find(bundle.fixture_key);
  if (it == responses_.end()) throw Error(ErrorCode::kProviderError, "no fixture for " + bundle.fixture_key);
  return {it->second, {estimate_tokens(bundle.system_text) + estimate_tokens(bundle.user_text),
                       estimate_tokens(it->second)}};
}

// ---------------------------------------------------------------------------

std::vector<ScriptedTextProvider::Rule> ScriptedTextProvider::load_rules(const fs::path& script_file) {
  std::vector<Rule> rules;
  const auto j = Json::parse(read_all(script_file));
  for (const auto& r : j) {
    const auto stage = parse_enum<Stage>(r.at("stage").get<std::string>());
    if (!stage) throw Error(ErrorCode::kInvalidArgument, "unknown stage in script: " + r.at("stage").dump());
    const auto& response = r.at("response");
    rules.push_back({*stage, r.value("match", ""), response.is_string() ? response.get<std::string>() : response.dump(2)});
  }
  return rules;
}

Completion ScriptedTextProvider::complete(const PromptBundle& bundle) {
  for (const auto& rule : rules_) {
    if (rule.stage == bundle.stage && bundle.user_text.find(rule.match) != std::string::npos) {
      return {rule.response_text, {estimate_tokens(bundle.user_text), estimate_tokens(rule.response_text)}};
    }
  }
  throw Error(ErrorCode::kProviderError, "no scripted response for " + bundle.fixture_key);
}

RecordingTextProvider::RecordingTextProvider(std::shared_ptr<TextProvider> inner, fs::path out_dir)
    : inner_(std::move(inner)), out_dir_(std::move(out_dir)) {
  fs::create_directories(out_dir_);
}

Completion RecordingTextProvider::complete(const PromptBundle& bundle) {
  auto completion = inner_->complete(bundle);
  const Json record{{"stage", to_string(bundle.stage)}, {"key", bundle.fixture_key}, {"response_text", completion.text}};
  std::lock_guard lock(mutex_);
  std::ofstream out(out_dir_ / file_name_for(bundle.fixture_key), std::ios::binary | std::ios::trunc);
  out << record.dump(2) << "\n";
  return completion;
}

// ---------------------------------------------------------------------------

ChatCompletionsProvider::ChatCompletionsProvider(std::shared_ptr<HttpTransport> transport, ChatProviderConfig config)
    : transport_(std::move(transport)), config_(std::move(config)) {
  while (!config_.endpoint.empty() && config_.endpoint.back() == '/') config_.endpoint.pop_back();
}

Completion ChatCompletionsProvider::complete(const PromptBundle& bundle) {
  Json messages = Json::array();
  if (!bundle.system_text.empty()) messages.push_back({{"role", "system"}, {"content", bundle.system_text}});
  messages.push_back({{"role", "user"}, {"content", bundle.user_text}});
  const Json payload{{"model", config_.model}, {"temperature", config_.temperature}, {"messages", messages}};

  HttpRequest request;
  request.method = "POST";
  request.url = config_.endpoint + "/chat/completions";
  request.timeout = config_.timeout;
  request.headers["Content-Type"] = "application/json";
  if (!config_.api_key.empty()) request.headers["Authorization"] = "Bearer " + config_.api_key;
  request.body = dump_json(payload);

  const auto response = transport_->send(request);
  if (response.status == 429 || response.status >= 500) {
    throw Error(ErrorCode::kIo, "completion endpoint returned HTTP " + std::to_string(response.status));
  }
  if (response.status != 200) {
    throw Error(ErrorCode::kProviderError, "completion endpoint returned HTTP " + std::to_string(response.status));
  }
  try {
    const auto j = Json::parse(response.body);
    Completion c;
    c.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (j.contains("usage")) {
      c.tokens.input = j["usage"].value("prompt_tokens", std::int64_t{0});
      c.tokens.output = j["usage"].value("completion_tokens", std::int64_t{0});
    } else {
      c.tokens = {estimate_tokens(request.body), estimate_tokens(c.text)};
    }
    return c;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kProviderError, std::string("unexpected completion payload: ") + e.what());
  }
}

std::string MockImageProvider::generate(const PromptBundle& bundle) {
  return "generated://headshots/" + hex64(fnv1a64(bundle.user_text)) + ".png";
}

std::string FailingImageProvider::generate(const PromptBundle&) {
  throw Error(ErrorCode::kProviderError, "image generation unavailable");
}

// ---------------------------------------------------------------------------

void CallLedger::record(ProviderCall call) {
  std::lock_guard lock(mutex_);
  calls_.push_back(std::move(call));
}

std::vector<ProviderCall> CallLedger::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::vector<ProviderCall> CallLedger::calls_for(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  std::vector<ProviderCall> out;
  for (const auto& c : calls_)
    if (c.job_id == job_id) out.push_back(c);
  return out;
}

std::size_t CallLedger::text_calls(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  return static_cast<std::size_t>(
      std::count_if(calls_.begin(), calls_.end(), [&](const auto& c) { return c.job_id == job_id && !c.image; }));
}

std::size_t CallLedger::image_calls(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  return static_cast<std::size_t>(
      std::count_if(calls_.begin(), calls_.end(), [&](const auto& c) { return c.job_id == job_id && c.image; }));
}

double CallLedger::cost(const TokenPrices& prices, const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  double total = 0.0;
  for (const auto& c : calls_) {
    if (!job_id.empty() && c.job_id != job_id) continue;
    if (c.image) {
      total += c.succeeded ? prices.per_image : 0.0;
    } else {
      total += static_cast<double>(c.tokens.input) * prices.input_per_token +
               static_cast<double>(c.tokens.output) * prices.output_per_token;
    }
  }
  return total;
}

void CallLedger::clear() {
  std::lock_guard lock(mutex_);
  calls_.clear();
}

// ---------------------------------------------------------------------------

LlmClient::LlmClient(std::shared_ptr<TextProvider> text, std::shared_ptr<ImageProvider> image,
                     std::shared_ptr<CallLedger> ledger, RetryPolicy policy, int max_concurrency)
    : text_(std::move(text)),
      image_(std::move(image)),
      ledger_(ledger ? std::move(ledger) : std::make_shared<CallLedger>()),
      policy_(policy),
      slots_(std::clamp(max_concurrency, 1, 64)) {}

std::string LlmClient::complete(const PromptBundle& bundle, const std::string& job_id) {
  if (!text_) throw Error(ErrorCode::kProviderError, "no text provider configured");
  for (int attempt = 0;; ++attempt) {
    ProviderCall call;
    call.job_id = job_id;
    call.stage = bundle.stage;
    const auto start = std::chrono::steady_clock::now();
    slots_.acquire();
    try {
      auto completion = text_->complete(bundle);
      slots_.release();
      call.tokens = completion.tokens;
      call.succeeded = true;
      call.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
      ledger_->record(call);
      return std::move(completion.text);
    } catch (const Error& e) {
      slots_.release();
      call.error = e.what();
      call.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
      ledger_->record(call);
      if (e.code() == ErrorCode::kIo && attempt < policy_.transport_retries) continue;
      throw Error(ErrorCode::kProviderError, std::string(to_string(bundle.stage)) + " completion failed: " + e.what());
    } catch (const std::exception& e) {
      slots_.release();
      call.error = e.what();
      ledger_->record(call);
      throw Error(ErrorCode::kProviderError, std::string(to_string(bundle.stage)) + " completion failed: " + e.what());
    }
  }
}

std::string LlmClient::generate_image(const PromptBundle& bundle, const std::string& job_id) {
  if (!image_) throw Error(ErrorCode::kProviderError, "no image provider configured");
  ProviderCall call;
  call.job_id = job_id;
  call.stage = bundle.stage;
  call.image = true;
  const auto start = std::chrono::steady_clock::now();
  slots_.acquire();
  try {
    auto locator = image_->generate(bundle);
    slots_.release();
    call.succeeded = true;
    call.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    ledger_->record(call);
    return locator;
  } catch (const std::exception& e) {
    slots_.release();
    call.error = e.what();
    ledger_->record(call);
    throw Error(ErrorCode::kProviderError, std::string("image generation failed: ") + e.what());
  }
}

}  // namespace personaflow
