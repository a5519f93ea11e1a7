#include "dualseq/data/synthetic.hpp"

#include <map>
#include <string_view>

#include "dualseq/errors.hpp"
#include "dualseq/rng.hpp"

namespace dualseq::data {

namespace {

using Words = std::vector<std::string_view>;

const std::map<std::string_view, Words>& slot_values() {
  static const std::map<std::string_view, Words> kSlots = {
      {"name", {"Sam", "George", "Elliot", "Jacob", "Samantha", "Paden", "Laura", "Mike", "Anna", "Peter", "Kate",
                "Tom", "Lucy", "Jack", "Emma", "Frank", "Nina", "Oscar", "Rita", "Victor"}},
      {"place", {"the river", "the park", "the station", "the beach", "the market", "the office", "the library",
                 "the hospital", "the airport", "the museum", "the harbor", "the bakery"}},
      {"food", {"pizza", "pasta", "soup", "bread", "cake", "fish", "rice", "salad", "steak", "noodles", "eggs",
                "apples"}},
      {"drink", {"coffee", "tea", "water", "juice", "milk", "wine", "beer", "lemonade"}},
      {"day", {"Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday", "tomorrow", "tonight"}},
      {"num", {"2", "3", "4", "5", "6", "7", "8", "9", "10", "12", "15", "20", "25", "30"}},
      {"activity", {"reading", "swimming", "dancing", "cooking", "running", "painting", "singing", "fishing",
                    "skating", "hiking"}},
      {"feeling", {"tired", "happy", "sad", "hungry", "bored", "excited", "nervous", "angry", "sick", "lonely"}},
      {"animal", {"dog", "cat", "horse", "bird", "rabbit", "fox", "bear", "snake"}},
      {"color", {"red", "blue", "green", "black", "white", "yellow", "brown", "gray"}},
      {"thing", {"car", "phone", "book", "key", "bag", "watch", "ticket", "letter", "camera", "umbrella"}},
      {"job", {"doctor", "teacher", "lawyer", "pilot", "nurse", "cook", "farmer", "writer", "soldier", "driver"}},
      {"city", {"Boston", "Paris", "London", "Chicago", "Rome", "Berlin", "Tokyo", "Denver", "Dallas", "Madrid"}},
  };
  return kSlots;
}

struct Response {
  std::string_view text;
  double weight;
};

struct Intent {
  Words prompts;
  std::vector<Response> responses;
};

// Prompts and responses share one slot assignment, so "{name}" in a response
// repeats the name drawn for the prompt.
const std::vector<Intent>& intents() {
  static const std::vector<Intent> kIntents = {
      {{"Hey, nice to see you again.", "Hello, nice to see you again, {name}.", "Nice to see you, {name}!"},
       {{"Hello, {name}. Nice to see you too.", 0.6}, {"Hi! How have you been?", 0.25}, {"Good to see you.", 0.15}}},
      {{"How old are you?", "How old are you, {name}?", "Can I ask how old you are?"},
       {{"I'm {num} years old.", 0.55}, {"Thirty-five.", 0.3}, {"Old enough.", 0.15}}},
      {{"What's your name?", "What is your name?", "Tell me your name, please."},
       {{"My name is {name}.", 0.6}, {"I'm {name}.", 0.25}, {"Why do you want to know?", 0.15}}},
      {{"Do you like me?", "Do you really like me, {name}?", "Tell me, do you like me?"},
       {{"Yes, I like you.", 0.6}, {"Of course I do.", 0.25}, {"Sure.", 0.15}}},
      {{"What are you doing?", "What are you doing at {place}?", "Hey {name}, what are you doing?"},
       {{"I'm {activity} at {place}.", 0.55}, {"Nothing much.", 0.3}, {"Just waiting for {name}.", 0.15}}},
      {{"How many days are you gonna stay?", "How many days are you gonna stay in {city}?",
        "So how long are you gonna stay?"},
       {{"I'll stay {num} days.", 0.5}, {"I don't know yet.", 0.3}, {"Until {day}.", 0.2}}},
      {{"How about going home?", "How about going to {place}?", "How about some {food}?"},
       {{"Okay, let's go.", 0.55}, {"That sounds good to me.", 0.3}, {"Not now, {name}.", 0.15}}},
      {{"I'm walking along the river.", "I was walking along {place} with my {animal}.",
        "We walked along the beach all day."},
       {{"What's the matter?", 0.45}, {"That sounds nice.", 0.35}, {"Was it cold?", 0.2}}},
      {{"Would you like some {food}?", "Do you want some {food} for dinner?", "I made {food}. Want some?"},
       {{"Yes, I love {food}.", 0.55}, {"No thanks, I'm not hungry.", 0.3}, {"Maybe later.", 0.15}}},
      {{"Can I get you a drink?", "Would you like some {drink}?", "Do you want {drink} or {drink2}?"},
       {{"A glass of {drink}, please.", 0.6}, {"Just water, thanks.", 0.25}, {"I'm fine, thank you.", 0.15}}},
      {{"Where are you going?", "Where are you going tonight, {name}?", "Where are you headed?"},
       {{"I'm going to {place}.", 0.6}, {"Home.", 0.25}, {"None of your business.", 0.15}}},
      {{"Where is {name}?", "Have you seen {name}?", "Do you know where {name} is?"},
       {{"{name} is at {place}.", 0.55}, {"I haven't seen {name} today.", 0.3}, {"No idea.", 0.15}}},
      {{"What time is it?", "Do you know what time it is?", "Excuse me, what time is it now?"},
       {{"It's {num} o'clock.", 0.55}, {"It's late.", 0.3}, {"I don't have a watch.", 0.15}}},
      {{"How are you feeling?", "How are you feeling today, {name}?", "Are you okay?"},
       {{"I feel {feeling}.", 0.55}, {"I'm fine, thanks.", 0.3}, {"Not so good.", 0.15}}},
      {{"Why are you so {feeling}?", "You look {feeling}. What happened?", "Why do you look so {feeling}?"},
       {{"I lost my {thing}.", 0.5}, {"It's a long story.", 0.3}, {"I don't want to talk about it.", 0.2}}},
      {{"What do you do for a living?", "What is your job?", "Where do you work, {name}?"},
       {{"I'm a {job}.", 0.6}, {"I work at {place}.", 0.25}, {"I'm looking for a job.", 0.15}}},
      {{"Where are you from?", "Are you from {city}?", "Which city are you from?"},
       {{"I'm from {city}.", 0.6}, {"I grew up in {city}.", 0.25}, {"A small town.", 0.15}}},
      {{"Have you ever been to {city}?", "Did you like {city}?", "What do you think about {city}?"},
       {{"Yes, {city} is beautiful.", 0.5}, {"Never been there.", 0.3}, {"It was too cold.", 0.2}}},
      {{"Do you have a {animal}?", "Is that your {animal}?", "What kind of pet do you have?"},
       {{"I have a {color} {animal}.", 0.55}, {"No, I don't like pets.", 0.3}, {"It's my sister's.", 0.15}}},
      {{"What's your favorite color?", "Do you like {color}?", "Which color do you like best?"},
       {{"I like {color}.", 0.6}, {"{color}, I think.", 0.25}, {"I don't have one.", 0.15}}},
      {{"Can you help me find my {thing}?", "Have you seen my {thing}?", "I can't find my {thing} anywhere."},
       {{"Your {thing} is on the table.", 0.5}, {"Sorry, I haven't seen it.", 0.3}, {"Look in the {thing2}.", 0.2}}},
      {{"When is the meeting?", "When do we meet again?", "What day is the party?"},
       {{"On {day}.", 0.55}, {"At {num} o'clock on {day}.", 0.3}, {"I forgot.", 0.15}}},
      {{"Do you want to go {activity} with me?", "Let's go {activity} on {day}.", "Do you like {activity}?"},
       {{"I love {activity}!", 0.5}, {"Sure, why not?", 0.3}, {"I'm too {feeling} today.", 0.2}}},
      {{"What did you eat for lunch?", "What did you have for dinner?", "Did you eat breakfast?"},
       {{"I had {food} and {drink}.", 0.55}, {"Just some {food}.", 0.3}, {"Nothing yet.", 0.15}}},
      {{"Thank you so much.", "Thanks for your help, {name}.", "Thanks a lot!"},
       {{"You're welcome.", 0.6}, {"No problem.", 0.25}, {"Anytime, {name}.", 0.15}}},
      {{"I'm sorry.", "I'm sorry about last night.", "Sorry, {name}. It was my fault."},
       {{"It's okay.", 0.5}, {"Don't worry about it.", 0.35}, {"You should be.", 0.15}}},
      {{"Goodbye.", "See you later, {name}.", "I have to go now. Bye!"},
       {{"Goodbye, {name}.", 0.55}, {"See you {day}.", 0.3}, {"Take care.", 0.15}}},
      {{"How much is the {thing}?", "How much does this {thing} cost?", "Is the {thing} expensive?"},
       {{"It's {num} dollars.", 0.6}, {"Too much for me.", 0.25}, {"It's free.", 0.15}}},
      {{"How is the weather today?", "Is it going to rain {day}?", "What's the weather like in {city}?"},
       {{"It's sunny and warm.", 0.45}, {"It's going to rain.", 0.35}, {"Cold and windy.", 0.2}}},
      {{"Who is that {job}?", "Do you know that {job}?", "Is {name} a {job}?"},
       {{"That's {name}, my {job}.", 0.5}, {"I've never seen him before.", 0.3}, {"Ask {name}.", 0.2}}},
      {{"Can you call {name} for me?", "Please call {name}.", "Did you call {name}?"},
       {{"I'll call {name} right now.", 0.55}, {"{name} isn't answering.", 0.3}, {"Call {name} yourself.", 0.15}}},
      {{"Where did you park the {thing}?", "Where is the {thing}?", "Did you leave the {thing} at {place}?"},
       {{"It's near {place}.", 0.55}, {"I left it at home.", 0.3}, {"I don't remember.", 0.15}}},
      {{"Are you ready?", "Are you ready to go, {name}?", "Is everybody ready?"},
       {{"Yes, I'm ready.", 0.55}, {"Give me {num} minutes.", 0.3}, {"Not yet.", 0.15}}},
      {{"What are you reading?", "Is that a good book?", "What is the book about?"},
       {{"It's a book about a {animal}.", 0.5}, {"A story about {city}.", 0.3}, {"Nothing special.", 0.15}}},
      {{"Do you know {name}?", "Have you met {name}?", "Is {name} your friend?"},
       {{"Yes, {name} is my friend.", 0.55}, {"I met {name} at {place}.", 0.3}, {"Never heard of {name}.", 0.15}}},
      {{"Can you drive me to {place}?", "Could you take me to {place}?", "I need a ride to {place}."},
       {{"Sure, get in the car.", 0.5}, {"I'll take you to {place}.", 0.35}, {"Take a taxi.", 0.15}}},
      {{"What's wrong with you?", "What's the matter, {name}?", "Is something wrong?"},
       {{"I'm just {feeling}.", 0.5}, {"Nothing is wrong.", 0.35}, {"Leave me alone.", 0.15}}},
      {{"Will you marry me?", "{name}, will you marry me?", "Do you want to marry me?"},
       {{"Yes, of course!", 0.5}, {"I need some time.", 0.3}, {"Are you crazy?", 0.2}}},
      {{"Where do you live?", "Do you live near {place}?", "Is your house far from here?"},
       {{"I live near {place}.", 0.55}, {"In {city}.", 0.3}, {"Not far from here.", 0.15}}},
      {{"Do you believe me?", "You don't believe me, do you?", "Why don't you believe me?"},
       {{"I believe you.", 0.5}, {"No, I don't.", 0.35}, {"Should I?", 0.15}}},
  };
  return kIntents;
}

std::string_view pick(const Words& w, Rng& rng) { return w[rng.below(w.size())]; }

// Replaces {slot} and {slot2} markers; a "2" suffix draws a second value
// distinct from the first.
std::string fill(std::string_view tmpl, std::map<std::string, std::string>& bound, Rng& rng) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] != '{') {
      out += tmpl[i++];
      continue;
    }
    const auto close = tmpl.find('}', i);
    if (close == std::string_view::npos) throw ContractError("unterminated slot in dialog template");
    const std::string key(tmpl.substr(i + 1, close - i - 1));
    auto it = bound.find(key);
    if (it == bound.end()) {
      const bool second = !key.empty() && key.back() == '2';
      const std::string base = second ? key.substr(0, key.size() - 1) : key;
      const auto slot = slot_values().find(base);
      if (slot == slot_values().end()) throw ContractError("unknown slot {" + key + "} in dialog template");
      std::string value(pick(slot->second, rng));
      if (second) {
        const auto first = bound.find(base);
        while (first != bound.end() && value == first->second && slot->second.size() > 1) {
          value = std::string(pick(slot->second, rng));
        }
      }
      it = bound.emplace(key, std::move(value)).first;
    }
    out += it->second;
    i = close + 1;
  }
  return out;
}

}  // namespace

std::vector<DialogPair> generate_dialogs(std::size_t n, std::uint64_t seed) {
  std::vector<DialogPair> out;
  out.reserve(n);
  const auto& all = intents();
  for (std::size_t k = 0; k < n; ++k) {
    Rng rng(seed, {0xd1a1ULL, k});
    const Intent& intent = all[rng.below(all.size())];
    std::map<std::string, std::string> bound;
    // Pre-bind every slot so prompt and response agree regardless of order.
    for (const auto& [name, values] : slot_values()) bound.emplace(std::string(name), std::string(pick(values, rng)));
    const std::string_view prompt = pick(intent.prompts, rng);
    double u = rng.uniform();
    std::string_view response = intent.responses.back().text;
    for (const auto& r : intent.responses) {
      if (u < r.weight) {
        response = r.text;
        break;
      }
      u -= r.weight;
    }
    DialogPair p;
    p.prompt = fill(prompt, bound, rng);
    p.response = fill(response, bound, rng);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace dualseq::data
