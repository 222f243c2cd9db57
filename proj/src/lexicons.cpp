#include "keystage/lexicons.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "keystage/errors.hpp"

#ifndef KEYSTAGE_RESOURCE_DIR
#define KEYSTAGE_RESOURCE_DIR "resources"
#endif

namespace keystage::lexicons {

using textseg::to_lower;

namespace {

using WordSet = std::unordered_set<std::string_view>;

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) {
    --e;
  }
  // UTF-8 byte order mark
  if (e - b >= 3 && s.substr(b, 3) == "\xEF\xBB\xBF") b += 3;
  return std::string(s.substr(b, e - b));
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot open resource file: " + path.string());
  return in;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream ss{std::string(s)};
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

// ---------------------------------------------------------------- closed class

const WordSet kDeterminers = {"the",   "a",    "an",     "this",   "that",    "these",
                              "those", "each", "every",  "some",   "any",     "no",
                              "all",   "both", "either", "neither", "another", "such"};

const WordSet kArticles = {"the", "a", "an"};

const WordSet kPronouns = {
    "i",     "me",     "my",       "mine",    "myself",     "you",    "your",  "yours",
    "yourself", "yourselves", "he", "him",    "his",        "himself", "she",  "her",
    "hers",  "herself", "it",      "its",     "itself",     "we",     "us",    "our",
    "ours",  "ourselves", "they",  "them",    "their",      "theirs", "themselves",
    "thee",  "thou",   "thy",      "thine",   "ye",         "i'm",    "i've",  "i'll",
    "i'd",   "you're", "you've",   "you'll",  "you'd",      "he's",   "he'll", "he'd",
    "she's", "she'll", "she'd",    "it's",    "we're",      "we've",  "we'll", "we'd",
    "they're", "they've", "they'll", "they'd"};

const WordSet kPossessives = {"my", "your", "his", "her", "its", "our", "their", "thy"};

const WordSet kPrepositions = {
    "about",   "above",   "across",     "after",  "against", "along",   "amid",    "amidst",
    "among",   "amongst", "around",     "at",     "before",  "behind",  "below",   "beneath",
    "beside",  "besides", "between",    "beyond", "by",      "despite", "down",    "during",
    "except",  "for",     "from",       "in",     "inside",  "into",    "near",    "of",
    "off",     "on",      "onto",       "out",    "outside", "over",    "past",    "per",
    "round",   "through", "throughout", "till",   "to",      "toward",  "towards", "under",
    "underneath", "unlike", "up",       "upon",   "with",    "within",  "without"};

const WordSet kCoordinators = {"and", "but", "or", "nor", "yet", "so"};

const WordSet kSubordinators = {"although", "because", "though",   "unless", "whereas",
                                "whilst",   "while",   "whenever", "wherever", "until",
                                "since",    "if",      "lest"};

const WordSet kInterrogatives = {"what", "which", "who",  "whom", "whose",
                                 "when", "where", "why",  "how"};

const WordSet kModals = {"can",    "could",  "will",   "would",    "shall",   "should",
                         "may",    "might",  "must",   "ought",    "can't",   "cannot",
                         "won't",  "couldn't", "wouldn't", "shouldn't", "mustn't", "mightn't",
                         "shan't"};

const WordSet kOtherFunction = {"not", "n't", "no", "to", "than", "there", "as", "too",
                                "very", "just", "then", "also", "only", "even", "here"};

const std::unordered_map<std::string_view, PosTag> kAuxiliaryTags = {
    {"be", PosTag::VB},        {"am", PosTag::VBP},       {"are", PosTag::VBP},
    {"is", PosTag::VBZ},       {"was", PosTag::VBD},      {"were", PosTag::VBD},
    {"been", PosTag::VBN},     {"being", PosTag::VBG},    {"have", PosTag::VBP},
    {"has", PosTag::VBZ},      {"had", PosTag::VBD},      {"having", PosTag::VBG},
    {"do", PosTag::VBP},       {"does", PosTag::VBZ},     {"did", PosTag::VBD},
    {"doing", PosTag::VBG},    {"done", PosTag::VBN},     {"don't", PosTag::VBP},
    {"doesn't", PosTag::VBZ},  {"didn't", PosTag::VBD},   {"isn't", PosTag::VBZ},
    {"aren't", PosTag::VBP},   {"wasn't", PosTag::VBD},   {"weren't", PosTag::VBD},
    {"hasn't", PosTag::VBZ},   {"haven't", PosTag::VBP},  {"hadn't", PosTag::VBD}};

const WordSet kHaveForms = {"have", "has", "had", "having", "haven't", "hasn't", "hadn't",
                            "i've", "you've", "we've", "they've"};
const WordSet kBeForms = {"be",    "am",     "is",      "are",    "was",    "were",
                          "been",  "being",  "isn't",   "aren't", "wasn't", "weren't",
                          "i'm",   "you're", "he's",    "she's",  "it's",   "we're",
                          "they're", "get",  "got",     "gets",   "getting"};

// Common base verbs; the -s rule and modal/"to" context rule consult this.
const WordSet kBaseVerbs = {
    "accept", "add", "admire", "admit", "agree", "allow", "answer", "appear", "arrive", "ask",
    "attack", "avoid", "bake", "bark", "beg", "believe", "belong", "blame", "boil", "borrow",
    "bounce", "breathe", "call", "care", "carry", "cause", "change", "chase", "cheer", "clean",
    "climb", "close", "collect", "comb", "complain", "consider", "contain", "continue", "cook",
    "copy", "count", "cover", "crawl", "cry", "dance", "decide", "deliver", "depend",
    "describe", "destroy", "die", "disappear", "discover", "drag", "dress", "drop", "dry",
    "earn", "end", "enjoy", "enter", "escape", "examine", "expect", "explain", "fail", "fetch",
    "fill", "finish", "fix", "float", "follow", "frighten", "gather", "glance", "grab", "greet",
    "guess", "hand", "happen", "hate", "help", "hope", "hug", "hunt", "hurry", "imagine",
    "include", "invite", "join", "joke", "jump", "kick", "kill", "kiss", "knock", "laugh",
    "learn", "lift", "like", "listen", "live", "look", "love", "marry", "matter", "mention",
    "mind", "miss", "move", "murmur", "need", "nod", "notice", "obey", "offer", "open",
    "order", "own", "paint", "pass", "pause", "pick", "place", "plan", "play", "point",
    "pour", "pray", "prefer", "prepare", "press", "pretend", "promise", "protect", "prove",
    "pull", "push", "reach", "realise", "realize", "receive", "refuse", "remain", "remember",
    "repeat", "reply", "rest", "return", "roar", "roll", "rush", "save", "scream", "search",
    "seem", "serve", "settle", "share", "shout", "sigh", "smile", "sneeze", "sound", "stare",
    "start", "stay", "step", "stop", "study", "succeed", "suffer", "suggest", "suppose",
    "surprise", "talk", "taste", "thank", "touch", "travel", "trust", "try", "turn", "use",
    "visit", "wait", "walk", "want", "wash", "watch", "whisper", "wish", "wonder", "work",
    "worry", "yell",
    // irregular bases
    "arise", "awake", "bear", "become", "begin", "bend", "bind", "bite", "bleed", "blow",
    "break", "bring", "build", "burn", "buy", "catch", "choose", "cling", "come", "creep",
    "cut", "deal", "dig", "draw", "dream", "drink", "drive", "eat", "fall", "feed", "feel",
    "fight", "find", "flee", "fling", "fly", "forbid", "forget", "forgive", "freeze", "get",
    "give", "go", "grow", "hang", "hear", "hide", "hit", "hold", "hurt", "keep", "kneel",
    "know", "lead", "leave", "lend", "let", "lose", "make", "mean", "meet", "pay", "put",
    "quit", "read", "ride", "ring", "rise", "run", "say", "see", "seek", "sell", "send", "set",
    "shake", "shine", "shoot", "show", "shut", "sing", "sink", "sit", "sleep", "slide",
    "speak", "spend", "spin", "spread", "spring", "stand", "steal", "stick", "sting",
    "strike", "swear", "sweep", "swim", "swing", "take", "teach", "tear", "tell", "think",
    "throw", "understand", "wake", "wear", "weep", "win", "write"};

// form -> tag, for irregular past (VBD) and participle (VBN) forms. Forms that
// are both are listed under kIrregularBoth and resolved by context.
const std::unordered_map<std::string_view, PosTag> kIrregularForms = {
    {"arose", PosTag::VBD},    {"arisen", PosTag::VBN},    {"awoke", PosTag::VBD},
    {"awoken", PosTag::VBN},   {"bore", PosTag::VBD},      {"borne", PosTag::VBN},
    {"beaten", PosTag::VBN},   {"became", PosTag::VBD},    {"began", PosTag::VBD},
    {"begun", PosTag::VBN},    {"bit", PosTag::VBD},       {"bitten", PosTag::VBN},
    {"blew", PosTag::VBD},     {"blown", PosTag::VBN},     {"broke", PosTag::VBD},
    {"broken", PosTag::VBN},   {"chose", PosTag::VBD},     {"chosen", PosTag::VBN},
    {"came", PosTag::VBD},     {"drew", PosTag::VBD},      {"drawn", PosTag::VBN},
    {"drank", PosTag::VBD},    {"drunk", PosTag::VBN},     {"drove", PosTag::VBD},
    {"driven", PosTag::VBN},   {"ate", PosTag::VBD},       {"eaten", PosTag::VBN},
    {"fell", PosTag::VBD},     {"fallen", PosTag::VBN},    {"flew", PosTag::VBD},
    {"flown", PosTag::VBN},    {"forbade", PosTag::VBD},   {"forbidden", PosTag::VBN},
    {"forgot", PosTag::VBD},   {"forgotten", PosTag::VBN}, {"forgave", PosTag::VBD},
    {"forgiven", PosTag::VBN}, {"froze", PosTag::VBD},     {"frozen", PosTag::VBN},
    {"gave", PosTag::VBD},     {"given", PosTag::VBN},     {"went", PosTag::VBD},
    {"gone", PosTag::VBN},     {"grew", PosTag::VBD},      {"grown", PosTag::VBN},
    {"hid", PosTag::VBD},      {"hidden", PosTag::VBN},    {"knew", PosTag::VBD},
    {"known", PosTag::VBN},    {"rode", PosTag::VBD},      {"ridden", PosTag::VBN},
    {"rang", PosTag::VBD},     {"rung", PosTag::VBN},      {"rose", PosTag::VBD},
    {"risen", PosTag::VBN},    {"ran", PosTag::VBD},       {"saw", PosTag::VBD},
    {"seen", PosTag::VBN},     {"shook", PosTag::VBD},     {"shaken", PosTag::VBN},
    {"shown", PosTag::VBN},    {"sang", PosTag::VBD},      {"sung", PosTag::VBN},
    {"sank", PosTag::VBD},     {"sunk", PosTag::VBN},      {"spoke", PosTag::VBD},
    {"spoken", PosTag::VBN},   {"sprang", PosTag::VBD},    {"sprung", PosTag::VBN},
    {"stole", PosTag::VBD},    {"stolen", PosTag::VBN},    {"swore", PosTag::VBD},
    {"sworn", PosTag::VBN},    {"swam", PosTag::VBD},      {"swum", PosTag::VBN},
    {"took", PosTag::VBD},     {"taken", PosTag::VBN},     {"tore", PosTag::VBD},
    {"torn", PosTag::VBN},     {"threw", PosTag::VBD},     {"thrown", PosTag::VBN},
    {"woke", PosTag::VBD},     {"woken", PosTag::VBN},     {"wore", PosTag::VBD},
    {"worn", PosTag::VBN},     {"wrote", PosTag::VBD},     {"written", PosTag::VBN}};

const WordSet kIrregularBoth = {
    "bent",   "bled",   "bound",  "brought", "built",  "burnt",  "bought", "caught", "clung",
    "crept",  "dealt",  "dug",    "dreamt",  "fed",    "felt",   "fought", "found",  "fled",
    "flung",  "got",    "hung",   "heard",   "held",   "kept",   "knelt",  "laid",   "led",
    "leant",  "leapt",  "learnt", "left",    "lent",   "lit",    "lost",   "made",   "meant",
    "met",    "paid",   "said",   "sought",  "sold",   "sent",   "shone",  "shot",   "sat",
    "slept",  "slid",   "spent",  "spun",    "stood",  "stuck",  "stung",  "struck", "swept",
    "swung",  "taught", "told",   "thought", "understood", "wept", "won", "wound"};

const WordSet kIngNouns = {"thing",   "things",   "king",     "kings",   "ring",     "rings",
                           "spring",  "string",   "wing",     "wings",   "morning",  "evening",
                           "nothing", "something", "anything", "everything", "ceiling",
                           "pudding", "shilling", "sibling",  "darling", "duckling", "stocking",
                           "stockings", "clothing", "herring", "farthing", "lightning",
                           "wedding", "building", "feeling", "meeting", "painting"};

const WordSet kEdNonVerbs = {"bed",    "red",   "shed",    "need",   "seed",    "feed",
                             "speed",  "indeed", "creed",  "greed",  "weed",    "breed",
                             "bleed",  "sled",  "hundred", "naked",  "sacred",  "wicked",
                             "wretched", "rugged", "ragged", "kindred", "sled", "proceed"};

const std::array<std::string_view, 9> kAdjectiveSuffixes = {
    "ous", "ful", "ive", "able", "ible", "ical", "less", "ish", "ary"};

bool in(const WordSet& set, std::string_view w) { return set.contains(w); }

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

bool has_vowel(std::string_view w) {
  return w.find_first_of("aeiouy") != std::string_view::npos;
}

bool is_capitalized(std::string_view surface) {
  if (surface.empty()) return false;
  const auto c = static_cast<unsigned char>(surface[0]);
  return (c >= 'A' && c <= 'Z') || c >= 0xC3;  // accented capitals are approximated
}

bool verb_stem_of_s_form(std::string_view w) {
  if (w.size() < 3 || !ends_with(w, "s") || ends_with(w, "ss") || ends_with(w, "us") ||
      ends_with(w, "is")) {
    return false;
  }
  const std::string s1(w.substr(0, w.size() - 1));
  if (in(kBaseVerbs, s1)) return true;
  if (ends_with(w, "es") && in(kBaseVerbs, w.substr(0, w.size() - 2))) return true;
  if (ends_with(w, "ies")) {
    const std::string y = std::string(w.substr(0, w.size() - 3)) + "y";
    if (in(kBaseVerbs, y)) return true;
  }
  return false;
}

// Looks back up to three words within the sentence for have/be.
bool perfect_or_passive_context(const std::vector<std::string>& lowers, std::size_t k) {
  for (std::size_t back = 1; back <= 3 && back <= k; ++back) {
    const std::string& w = lowers[k - back];
    if (in(kHaveForms, w) || in(kBeForms, w)) return true;
  }
  return false;
}

PosTag tag_word(const std::vector<std::string>& lowers, const std::vector<std::string>& surfaces,
                const std::vector<PosTag>& tags, std::size_t k) {
  const std::string& w = lowers[k];
  const std::string* prev = k > 0 ? &lowers[k - 1] : nullptr;
  const PosTag prev_tag = k > 0 ? tags[k - 1] : PosTag::OTHER;

  if (in(kArticles, w)) return PosTag::DT;
  if (in(kPronouns, w)) return PosTag::PRP;
  if (in(kDeterminers, w)) return PosTag::DT;
  if (in(kCoordinators, w)) return PosTag::CC;
  if (in(kInterrogatives, w)) return PosTag::WH;
  if (in(kPrepositions, w) || in(kSubordinators, w)) return PosTag::IN;
  if (in(kModals, w)) return PosTag::OTHER;
  if (auto it = kAuxiliaryTags.find(w); it != kAuxiliaryTags.end()) {
    if ((w == "have" || w == "do") && prev && (in(kModals, *prev) || *prev == "to")) {
      return PosTag::VB;
    }
    return it->second;
  }
  if (in(kOtherFunction, w)) return PosTag::OTHER;
  if (std::isdigit(static_cast<unsigned char>(w[0]))) return PosTag::OTHER;
  if (k > 0 && is_capitalized(surfaces[k])) return PosTag::NN;

  const bool after_determiner = prev_tag == PosTag::DT || (prev && in(kPossessives, *prev));
  if (auto it = kIrregularForms.find(w); it != kIrregularForms.end()) {
    return after_determiner ? PosTag::NN : it->second;
  }
  if (in(kIrregularBoth, w)) {
    if (after_determiner) return PosTag::NN;
    return perfect_or_passive_context(lowers, k) ? PosTag::VBN : PosTag::VBD;
  }
  if (prev && (in(kModals, *prev) || *prev == "to") && in(kBaseVerbs, w)) return PosTag::VB;
  if (w.size() >= 5 && ends_with(w, "ing") && has_vowel(w.substr(0, w.size() - 3)) &&
      !in(kIngNouns, w)) {
    return PosTag::VBG;
  }
  if (w.size() >= 4 && ends_with(w, "ed") && !in(kEdNonVerbs, w)) {
    if (after_determiner) return PosTag::OTHER;  // participial adjective
    return perfect_or_passive_context(lowers, k) ? PosTag::VBN : PosTag::VBD;
  }
  if (ends_with(w, "ly") && w.size() >= 4) return PosTag::OTHER;
  for (std::string_view suffix : kAdjectiveSuffixes) {
    if (w.size() > suffix.size() + 2 && ends_with(w, suffix)) return PosTag::OTHER;
  }
  if (!after_determiner && verb_stem_of_s_form(w)) return PosTag::VBZ;
  if (in(kBaseVerbs, w) && !after_determiner && prev_tag != PosTag::IN) {
    if (k == 0) return PosTag::VB;  // imperative
    if (prev_tag == PosTag::PRP || prev_tag == PosTag::NN) return PosTag::VBP;
  }
  return PosTag::NN;
}

const WordSet kHonorifics = {"mr",   "mrs",  "ms",       "miss",    "dr",    "sir",
                             "lady", "lord", "madam",    "mister",  "captain", "professor",
                             "king", "queen", "prince",  "princess", "uncle", "aunt"};

}  // namespace

// ------------------------------------------------------------------ WordList

WordList::WordList(std::string name, std::unordered_set<std::string> entries)
    : name_(std::move(name)), entries_(std::move(entries)) {}

bool WordList::contains(std::string_view word) const {
  return entries_.contains(to_lower(word));
}

void WordList::expand_families(const std::filesystem::path& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::replace(t.begin(), t.end(), ':', ' ');
    std::replace(t.begin(), t.end(), ',', ' ');
    for (const auto& member : split_ws(t)) entries_.insert(to_lower(member));
  }
}

WordList load_word_list(const std::filesystem::path& path, std::string name) {
  std::ifstream in = open_or_throw(path);
  std::unordered_set<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    entries.insert(to_lower(t));
  }
  if (entries.empty()) throw ValidationError("word list has no entries: " + path.string());
  return WordList(std::move(name), std::move(entries));
}

// ------------------------------------------------------------------- affect

std::string_view to_string(Emotion e) {
  switch (e) {
    case Emotion::Fear: return "fear";
    case Emotion::Anger: return "anger";
    case Emotion::Anticipation: return "anticipation";
    case Emotion::Trust: return "trust";
    case Emotion::Surprise: return "surprise";
    case Emotion::Sadness: return "sadness";
    case Emotion::Disgust: return "disgust";
    case Emotion::Joy: return "joy";
  }
  return "unknown";
}

std::optional<Emotion> parse_emotion(std::string_view name) {
  const std::string lower = to_lower(name);
  for (Emotion e : kEmotions) {
    if (to_string(e) == lower) return e;
  }
  return std::nullopt;
}

AffectLexicon::AffectLexicon(std::unordered_map<std::string, AffectEntry> entries)
    : entries_(std::move(entries)) {}

const AffectEntry* AffectLexicon::find(std::string_view word) const {
  const auto it = entries_.find(to_lower(word));
  return it == entries_.end() ? nullptr : &it->second;
}

namespace {

double parse_double(std::string_view field, const std::filesystem::path& path, std::size_t line) {
  double value = 0.0;
  const std::string f = trim(field);
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
  if (ec != std::errc{} || ptr != f.data() + f.size()) {
    throw ValidationError(path.string() + ":" + std::to_string(line) + ": not a number: '" + f +
                          "'");
  }
  return value;
}

std::vector<std::string_view> split_tabs(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '\t') {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

AffectLexicon load_affect_lexicon(const std::filesystem::path& path) {
  std::ifstream in = open_or_throw(path);
  std::unordered_map<std::string, AffectEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 3) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected word<TAB>polarity<TAB>subjectivity[<TAB>emotions]");
    }
    AffectEntry entry;
    entry.polarity = parse_double(fields[1], path, line_no);
    entry.subjectivity = parse_double(fields[2], path, line_no);
    if (entry.polarity < -1.0 || entry.polarity > 1.0) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": polarity outside [-1, 1]");
    }
    if (entry.subjectivity < 0.0 || entry.subjectivity > 1.0) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": subjectivity outside [0, 1]");
    }
    if (fields.size() >= 4) {
      std::string emo(fields[3]);
      std::replace(emo.begin(), emo.end(), ',', ' ');
      for (const auto& name : split_ws(emo)) {
        const auto e = parse_emotion(name);
        if (!e) {
          throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                ": unknown emotion '" + name + "'");
        }
        entry.emotions[static_cast<std::size_t>(*e)] = true;
      }
    }
    entries[to_lower(trim(fields[0]))] = entry;
  }
  if (entries.empty()) throw ValidationError("affect lexicon has no entries: " + path.string());
  return AffectLexicon(std::move(entries));
}

// ---------------------------------------------------------------- tagging

std::string_view to_string(PosTag tag) {
  switch (tag) {
    case PosTag::VB: return "VB";
    case PosTag::VBP: return "VBP";
    case PosTag::VBZ: return "VBZ";
    case PosTag::VBD: return "VBD";
    case PosTag::VBN: return "VBN";
    case PosTag::VBG: return "VBG";
    case PosTag::NN: return "NN";
    case PosTag::PRP: return "PRP";
    case PosTag::IN: return "IN";
    case PosTag::CC: return "CC";
    case PosTag::DT: return "DT";
    case PosTag::WH: return "WH";
    case PosTag::OTHER: return "OTHER";
  }
  return "OTHER";
}

namespace closed_class {
bool is_determiner(std::string_view w) { return in(kDeterminers, w); }
bool is_article(std::string_view w) { return in(kArticles, w); }
bool is_pronoun(std::string_view w) { return in(kPronouns, w); }
bool is_preposition(std::string_view w) { return in(kPrepositions, w); }
bool is_coordinator(std::string_view w) { return in(kCoordinators, w); }
bool is_subordinator(std::string_view w) { return in(kSubordinators, w); }
bool is_interrogative(std::string_view w) { return in(kInterrogatives, w); }
bool is_modal(std::string_view w) { return in(kModals, w); }
bool is_auxiliary(std::string_view w) { return kAuxiliaryTags.contains(w); }
bool is_function_word(std::string_view w) {
  return is_determiner(w) || is_pronoun(w) || is_preposition(w) || is_coordinator(w) ||
         is_subordinator(w) || is_interrogative(w) || is_modal(w) || is_auxiliary(w) ||
         in(kOtherFunction, w);
}
}  // namespace closed_class

bool is_known_verb(std::string_view lower) { return in(kBaseVerbs, lower); }

std::vector<PosTag> tag_pos(const textseg::SegmentedText& segmented) {
  std::vector<PosTag> out;
  out.reserve(segmented.tokens.size());
  for (const auto& sentence : segmented.sentences) {
    std::vector<std::string> lowers;
    std::vector<std::string> surfaces;
    for (std::size_t t = sentence.begin; t < sentence.end; ++t) {
      const auto& tok = segmented.tokens[t];
      if (!tok.is_word()) continue;
      lowers.push_back(to_lower(tok.surface));
      surfaces.push_back(tok.surface);
    }
    std::vector<PosTag> tags;
    tags.reserve(lowers.size());
    for (std::size_t k = 0; k < lowers.size(); ++k) {
      tags.push_back(tag_word(lowers, surfaces, tags, k));
    }
    out.insert(out.end(), tags.begin(), tags.end());
  }
  return out;
}

// ---------------------------------------------------------------- gazetteer

void Gazetteer::add(std::string_view label, std::string_view entry) {
  const auto it = std::find(kNerLabels.begin(), kNerLabels.end(), label);
  if (it == kNerLabels.end()) {
    throw ValidationError("unknown NER label: " + std::string(label));
  }
  std::vector<std::string> words;
  for (const auto& tok : textseg::tokenize(entry)) {
    if (tok.is_word()) words.push_back(to_lower(tok.surface));
  }
  if (words.empty()) return;
  max_words_ = std::max(max_words_, words.size());
  const std::size_t label_index = static_cast<std::size_t>(it - kNerLabels.begin());
  auto& bucket = by_first_[words.front()];
  for (const auto& [existing, idx] : bucket) {
    if (existing == words) return;  // first label wins for duplicates
  }
  bucket.emplace_back(std::move(words), label_index);
}

Gazetteer Gazetteer::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ResourceError("gazetteer directory not found: " + dir.string());
  }
  Gazetteer g;
  for (std::string_view label : kNerLabels) {
    const auto path = dir / (std::string(label) + ".txt");
    if (!std::filesystem::exists(path)) continue;
    std::ifstream in = open_or_throw(path);
    std::string line;
    while (std::getline(in, line)) {
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      g.add(label, t);
    }
  }
  return g;
}

std::optional<std::pair<std::string_view, std::size_t>> Gazetteer::match(
    const std::vector<std::string>& words_lower, std::size_t i) const {
  const auto it = by_first_.find(words_lower[i]);
  if (it == by_first_.end()) return std::nullopt;
  std::optional<std::pair<std::string_view, std::size_t>> best;
  for (const auto& [words, label_index] : it->second) {
    if (i + words.size() > words_lower.size()) continue;
    if (!std::equal(words.begin(), words.end(), words_lower.begin() + static_cast<std::ptrdiff_t>(i))) {
      continue;
    }
    if (!best || words.size() > best->second) {
      best = std::make_pair(kNerLabels[label_index], words.size());
    }
  }
  return best;
}

std::optional<std::string_view> Gazetteer::label_of(std::string_view lower_single) const {
  const auto m = match({std::string(lower_single)}, 0);
  if (!m) return std::nullopt;
  return m->first;
}

std::map<std::string, std::size_t> ner_counts(const textseg::SegmentedText& segmented,
                                              const Gazetteer& gazetteer) {
  std::map<std::string, std::size_t> counts;
  for (std::string_view label : kNerLabels) counts[std::string(label)] = 0;

  const auto& tokens = segmented.tokens;
  for (const auto& sentence : segmented.sentences) {
    // Maximal runs of adjacent word tokens; an honorific's '.' is bridged.
    std::size_t t = sentence.begin;
    while (t < sentence.end) {
      if (!tokens[t].is_word()) {
        ++t;
        continue;
      }
      std::vector<std::string> lowers;
      std::vector<std::string> surfaces;
      std::size_t u = t;
      while (u < sentence.end && tokens[u].is_word()) {
        lowers.push_back(to_lower(tokens[u].surface));
        surfaces.push_back(tokens[u].surface);
        ++u;
      }
      // Honorific immediately before this run ("Mr. Smith"): t-2 is the
      // honorific and t-1 its period.
      bool after_honorific = false;
      if (t >= sentence.begin + 2 && tokens[t - 1].surface == "." && tokens[t - 2].is_word() &&
          in(kHonorifics, to_lower(tokens[t - 2].surface))) {
        after_honorific = true;
      }

      std::size_t i = 0;
      while (i < lowers.size()) {
        if (!is_capitalized(surfaces[i])) {
          ++i;
          continue;
        }
        if (auto m = gazetteer.match(lowers, i)) {
          ++counts[std::string(m->first)];
          i += m->second;
          continue;
        }
        if (i == 0 && after_honorific && !closed_class::is_function_word(lowers[0])) {
          std::size_t j = 1;
          while (j < lowers.size() && is_capitalized(surfaces[j])) ++j;
          ++counts["PERSON"];
          i = j;
          continue;
        }
        if (in(kHonorifics, lowers[i]) && i + 1 < lowers.size() && is_capitalized(surfaces[i + 1])) {
          std::size_t j = i + 1;
          while (j < lowers.size() && is_capitalized(surfaces[j])) ++j;
          ++counts["PERSON"];
          i = j;
          continue;
        }
        std::size_t j = i;
        while (j < lowers.size() && is_capitalized(surfaces[j]) &&
               !closed_class::is_function_word(lowers[j]) &&
               (j == i || !gazetteer.match(lowers, j))) {
          ++j;
        }
        if (j - i >= 2) {
          ++counts["PERSON"];
          i = j;
        } else {
          ++i;
        }
      }
      t = u;
    }
  }
  return counts;
}

// ---------------------------------------------------------------- loading

ResourcePaths ResourcePaths::under(const std::filesystem::path& root) {
  ResourcePaths p;
  p.oxford3000 = root / "wordlists" / "oxford3000.txt";
  p.awl = root / "wordlists" / "awl.txt";
  p.awl_families = root / "wordlists" / "awl_families.txt";
  p.dale_chall = root / "wordlists" / "dale_chall.txt";
  p.affect = root / "affect.tsv";
  p.gazetteer_dir = root / "gazetteer";
  p.curriculum_dir = root / "curriculum";
  p.demos_dir = root / "demos";
  return p;
}

std::filesystem::path ResourcePaths::default_root() {
  if (const char* env = std::getenv("KEYSTAGE_RESOURCES"); env && *env) return env;
  return KEYSTAGE_RESOURCE_DIR;
}

Lexicons Lexicons::load(const ResourcePaths& paths) {
  Lexicons lex;
  lex.oxford3000 = load_word_list(paths.oxford3000, "oxford3000");
  lex.awl = load_word_list(paths.awl, "awl");
  if (!paths.awl_families.empty() && std::filesystem::exists(paths.awl_families)) {
    lex.awl.expand_families(paths.awl_families);
  }
  lex.dale_chall = load_word_list(paths.dale_chall, "dale_chall");
  lex.affect = load_affect_lexicon(paths.affect);
  lex.gazetteer = Gazetteer::load(paths.gazetteer_dir);
  return lex;
}

}  // namespace keystage::lexicons
