#pragma once

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "rankinject/common.hpp"

// Bundled English word lists: stopwords, a verb lexicon, a noun lexicon and an
// abbreviation guard list for the sentence splitter. The lexicons hold base
// forms plus common irregulars; inflected forms are matched through the suffix
// heuristics in textkit. These lists are versioned data, not linguistics: they
// approximate the POS information an off-the-shelf pipeline would provide.

namespace rankinject {

inline constexpr std::string_view kStopwordListVersion = "en-stop-1";
inline constexpr std::string_view kLexiconVersion = "en-lex-1";

/// Immutable lowercase word set. Used for stopword lists and the verb/noun
/// lexicons. Custom lists load from UTF-8 files with one entry per line;
/// entries are lowercased on load.
class WordList {
public:
    WordList(std::initializer_list<std::string_view> words, std::string version)
        : version_(std::move(version)) {
        for (auto w : words) words_.emplace(w);
        if (words_.empty()) throw Error("WordList: empty list");
    }

    WordList(std::vector<std::string> words, std::string version) : version_(std::move(version)) {
        for (auto& w : words) words_.insert(to_lower(w));
        if (words_.empty()) throw Error("WordList: empty list");
    }

    static WordList from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open word list: " + path);
        std::vector<std::string> words;
        std::string line;
        while (std::getline(in, line)) {
            auto t = trim(line);
            if (!t.empty()) words.emplace_back(t);
        }
        if (words.empty()) throw Error("word list is empty: " + path);
        return WordList(std::move(words), path);
    }

    bool contains(std::string_view lowercase_word) const {
        return words_.count(std::string(lowercase_word)) > 0;
    }

    size_t size() const { return words_.size(); }
    const std::string& version() const { return version_; }

    // Entries in lexicographic order, for deterministic iteration or export.
    std::vector<std::string> sorted_words() const {
        std::vector<std::string> out(words_.begin(), words_.end());
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::unordered_set<std::string> words_;
    std::string version_;
};

using StopwordList = WordList;

inline const StopwordList& bundled_stopwords() {
    static const StopwordList list{
        {"a",        "about",   "above",   "after",    "again",      "against",  "all",
         "am",       "an",      "and",     "any",      "are",        "aren't",   "as",
         "at",       "be",      "because", "been",     "before",     "being",    "below",
         "between",  "both",    "but",     "by",       "can",        "cannot",   "could",
         "couldn't", "did",     "didn't",  "do",       "does",       "doesn't",  "doing",
         "don't",    "down",    "during",  "each",     "few",        "for",      "from",
         "further",  "had",     "hadn't",  "has",      "hasn't",     "have",     "haven't",
         "having",   "he",      "he'd",    "he'll",    "he's",       "her",      "here",
         "here's",   "hers",    "herself", "him",      "himself",    "his",      "how",
         "how's",    "i",       "i'd",     "i'll",     "i'm",        "i've",     "if",
         "in",       "into",    "is",      "isn't",    "it",         "it's",     "its",
         "itself",   "just",    "let's",   "me",       "more",       "most",     "mustn't",
         "my",       "myself",  "no",      "nor",      "not",        "now",      "of",
         "off",      "on",      "once",    "only",     "or",         "other",    "ought",
         "our",      "ours",    "ourselves", "out",    "over",       "own",      "same",
         "shan't",   "she",     "she'd",   "she'll",   "she's",      "should",   "shouldn't",
         "so",       "some",    "such",    "than",     "that",       "that's",   "the",
         "their",    "theirs",  "them",    "themselves", "then",     "there",    "there's",
         "these",    "they",    "they'd",  "they'll",  "they're",    "they've",  "this",
         "those",    "through", "to",      "too",      "under",      "until",    "up",
         "very",     "was",     "wasn't",  "we",       "we'd",       "we'll",    "we're",
         "we've",    "were",    "weren't", "what",     "what's",     "when",     "when's",
         "where",    "where's", "which",   "while",    "who",        "who's",    "whom",
         "why",      "why's",   "will",    "with",     "won't",      "would",    "wouldn't",
         "you",      "you'd",   "you'll",  "you're",   "you've",     "your",     "yours",
         "yourself", "yourselves"},
        std::string(kStopwordListVersion)};
    return list;
}

inline const WordList& bundled_verbs() {
    static const WordList list{
        {// auxiliaries and copulas, matched exactly
         "be", "is", "am", "are", "was", "were", "been", "being", "have", "has", "had",
         "having", "do", "does", "did", "done", "doing", "can", "could", "will", "would",
         "shall", "should", "may", "might", "must",
         // common base forms; -s/-es/-ed/-d/-ing inflections resolve via suffix rules
         "accept", "achieve", "act", "add", "admit", "affect", "agree", "aim", "allow",
         "announce", "answer", "appear", "apply", "argue", "arrive", "ask", "assume",
         "attack", "attempt", "avoid", "base", "bear", "beat", "become", "begin", "behave",
         "believe", "belong", "bend", "bite", "blow", "boil", "borrow", "break", "breathe",
         "bring", "build", "burn", "buy", "calculate", "call", "care", "carry", "catch",
         "cause", "change", "charge", "check", "choose", "claim", "clean", "clear", "climb",
         "close", "collect", "combine", "come", "compare", "complete", "confirm", "connect",
         "consider", "consist", "contain", "continue", "contribute", "control", "cook",
         "copy", "cost", "count", "cover", "create", "cross", "cry", "cut", "dance", "deal",
         "decide", "decrease", "define", "deliver", "demand", "depend", "describe", "design",
         "destroy", "develop", "die", "differ", "disagree", "discover", "discuss", "divide",
         "draw", "dream", "dress", "drink", "drive", "drop", "dry", "earn", "eat", "emerge",
         "employ", "enable", "encourage", "end", "enjoy", "ensure", "enter", "establish",
         "estimate", "examine", "exist", "expand", "expect", "experience", "explain",
         "explore", "express", "extend", "face", "fail", "fall", "feed", "feel", "fight",
         "fill", "find", "finish", "fit", "fix", "flow", "fly", "focus", "follow", "force",
         "forget", "form", "gain", "gather", "generate", "get", "give", "go", "grow",
         "handle", "hang", "happen", "hate", "hear", "help", "hide", "hit", "hold", "hope",
         "hunt", "hurt", "identify", "ignore", "imagine", "improve", "include", "increase",
         "indicate", "influence", "inform", "injure", "insert", "intend", "introduce",
         "invest", "investigate", "involve", "join", "jump", "keep", "kill", "know", "land",
         "last", "laugh", "lead", "lean", "learn", "leave", "lend", "let", "lie", "lift",
         "like", "limit", "link", "list", "listen", "live", "look", "lose", "love", "maintain",
         "make", "manage", "mark", "match", "matter", "mean", "measure", "meet", "melt",
         "mention", "mind", "miss", "mix", "move", "need", "note", "notice", "obtain",
         "occur", "offer", "open", "operate", "order", "own", "pass", "pay", "perform",
         "pick", "place", "plan", "plant", "play", "point", "prefer", "prepare", "present",
         "press", "prevent", "produce", "promise", "protect", "prove", "provide", "publish",
         "pull", "push", "put", "raise", "range", "reach", "read", "realize", "receive",
         "recognize", "record", "reduce", "refer", "reflect", "refuse", "relate", "release",
         "remain", "remember", "remove", "repeat", "replace", "report", "represent",
         "require", "respond", "rest", "result", "return", "reveal", "ride", "rise", "roll",
         "run", "save", "say", "search", "see", "seek", "seem", "sell", "send", "serve",
         "set", "settle", "share", "shine", "shoot", "show", "shut", "sing", "sit", "sleep",
         "smell", "smile", "solve", "sound", "speak", "spend", "split", "spread", "stand",
         "start", "state", "stay", "stop", "store", "study", "succeed", "suffer", "suggest",
         "supply", "support", "suppose", "survive", "swim", "take", "talk", "teach", "tell",
         "tend", "test", "think", "throw", "touch", "train", "travel", "treat", "try",
         "turn", "understand", "use", "visit", "vote", "wait", "walk", "want", "warm",
         "warn", "wash", "watch", "wear", "weigh", "win", "wish", "wonder", "work", "worry",
         "write",
         // frequent irregular past/participle forms
         "ate", "began", "begun", "bent", "bit", "blew", "bought", "broke", "broken",
         "brought", "built", "came", "caught", "chose", "chosen", "drank", "drawn", "drew",
         "driven", "drove", "fed", "fell", "felt", "flew", "flown", "forgot", "fought",
         "found", "gave", "given", "gone", "got", "gotten", "grew", "grown", "heard",
         "held", "hid", "kept", "knew", "known", "laid", "lay", "led", "left", "lent",
         "lost", "made", "meant", "met", "paid", "ran", "rode", "rose", "said", "sang",
         "sat", "saw", "seen", "sent", "shot", "slept", "sold", "spent", "spoke", "spoken",
         "stood", "swam", "taken", "taught", "thought", "threw", "thrown", "told", "took",
         "went", "wore", "won", "written", "wrote"},
        std::string(kLexiconVersion)};
    return list;
}

inline const WordList& bundled_nouns() {
    static const WordList list{
        {"ability",     "access",      "account",    "acid",       "action",     "activity",
         "address",     "adult",       "advantage",  "advice",     "age",        "agent",
         "agreement",   "air",         "amount",     "analysis",   "angle",      "animal",
         "answer",      "ant",         "apple",      "approach",   "area",       "argument",
         "arm",         "army",        "art",        "article",    "artist",     "atom",
         "attack",      "attention",   "author",     "authority",  "average",    "baby",
         "back",        "ball",        "bank",       "base",       "battery",    "beach",
         "bear",        "bed",         "bee",        "beginning",  "behavior",   "benefit",
         "bird",        "bit",         "blood",      "board",      "boat",       "body",
         "bone",        "book",        "bottle",     "bottom",     "box",        "boy",
         "brain",       "bread",       "bridge",     "brother",    "building",   "business",
         "cake",        "calendar",    "camera",     "cancer",     "capital",    "car",
         "carbon",      "card",        "care",       "career",     "case",       "cat",
         "category",    "cause",       "cell",       "center",     "century",    "chain",
         "chair",       "challenge",   "chance",     "change",     "chapter",    "character",
         "charge",      "chemical",    "chest",      "chicken",    "child",      "children",
         "choice",      "church",      "circle",     "city",       "claim",      "class",
         "climate",     "clock",       "cloud",      "club",       "coal",       "coast",
         "code",        "coffee",      "cold",       "college",    "color",      "column",
         "community",   "company",     "computer",   "concept",    "condition",  "conference",
         "connection",  "context",     "contract",   "control",    "copy",       "corner",
         "corpus",      "cost",        "country",    "couple",     "course",     "court",
         "cow",         "credit",      "crime",      "crowd",      "culture",    "cup",
         "currency",    "customer",    "cycle",      "damage",     "data",       "database",
         "dataset",     "date",        "daughter",   "day",        "death",      "debate",
         "decade",      "decision",    "degree",     "demand",     "design",     "desk",
         "detail",      "device",      "diet",       "difference", "dinner",     "direction",
         "disease",     "distance",    "doctor",     "document",   "dog",        "dollar",
         "dolphin",     "door",        "dream",      "drink",      "driver",     "drug",
         "ear",         "earth",       "economy",    "edge",       "education",  "effect",
         "effort",      "egg",         "election",   "electron",   "element",    "energy",
         "engine",      "engineer",    "environment", "equipment", "error",      "evening",
         "event",       "evidence",    "example",    "exercise",   "experience", "experiment",
         "expert",      "eye",         "face",       "fact",       "factor",     "factory",
         "family",      "farm",        "father",     "fear",       "feature",    "fever",
         "field",       "fig",         "figure",     "file",       "film",       "finding",
         "finger",      "fire",        "fish",       "flea",       "flight",     "floor",
         "flower",      "fly",         "focus",      "food",       "foot",       "force",
         "forest",      "form",        "formula",    "fox",        "frame",      "friend",
         "frog",        "front",       "fruit",      "fuel",       "function",   "future",
         "game",        "garden",      "gas",        "gene",       "girl",       "glass",
         "goal",        "gold",        "government", "grade",      "grass",      "ground",
         "group",       "growth",      "guide",      "gun",        "guy",        "hair",
         "half",        "hand",        "head",       "health",     "heart",      "heat",
         "height",      "history",     "hole",       "home",       "horse",      "hospital",
         "hotel",       "hour",        "house",      "human",      "ice",        "idea",
         "image",       "impact",      "income",     "index",      "industry",   "information",
         "insect",      "instance",    "insurance",  "interest",   "internet",   "interview",
         "iron",        "island",      "issue",      "item",       "job",        "journal",
         "judge",       "key",         "kind",       "king",       "kitchen",    "knee",
         "knife",       "knowledge",   "lab",        "label",      "lake",       "land",
         "language",    "law",         "lawyer",     "leader",     "leaf",       "league",
         "leg",         "length",      "lesson",     "letter",     "level",      "library",
         "life",        "light",       "limit",      "line",       "lion",       "list",
         "literature",  "location",    "logic",      "loss",       "lot",        "lunch",
         "machine",     "magazine",    "majority",   "man",        "management", "manager",
         "map",         "margin",      "mark",       "market",     "mass",       "match",
         "material",    "math",        "matter",     "meal",       "meaning",    "measure",
         "meat",        "media",       "medicine",   "meeting",    "member",     "memory",
         "men",         "message",     "metal",      "meter",      "method",     "mice",
         "middle",      "milk",        "mind",       "minute",     "mirror",     "model",
         "moment",      "money",       "month",      "moon",       "morning",    "mother",
         "motion",      "mountain",    "mouse",      "mouth",      "movie",      "muscle",
         "music",       "name",        "nation",     "nature",     "neck",       "network",
         "news",        "newspaper",   "night",      "noise",      "north",      "nose",
         "note",        "number",      "nurse",      "object",     "ocean",      "offer",
         "office",      "officer",     "oil",        "operation",  "opinion",    "option",
         "order",       "organization", "owner",     "oxygen",     "page",       "pain",
         "painting",    "pair",        "paper",      "parent",     "park",       "part",
         "particle",    "partner",     "party",      "passage",    "past",       "path",
         "patient",     "pattern",     "peace",      "people",     "percent",    "performance",
         "period",      "person",      "phone",      "photo",      "phrase",     "piano",
         "picture",     "piece",       "pig",        "place",      "plan",       "plane",
         "planet",      "plant",       "plastic",    "plate",      "player",     "point",
         "police",      "policy",      "pool",       "population", "position",   "potato",
         "power",       "practice",    "president",  "pressure",   "price",      "problem",
         "procedure",   "process",     "product",    "professor",  "profit",     "program",
         "project",     "property",    "protein",    "purpose",    "quality",    "quarter",
         "queen",       "query",       "question",   "rabbit",     "race",       "radio",
         "rain",        "range",       "rank",       "rate",       "ratio",      "reaction",
         "reader",      "reason",      "recipe",     "record",     "region",     "relation",
         "relationship", "report",     "research",   "resource",   "response",   "rest",
         "result",      "return",      "review",     "rice",       "ring",       "risk",
         "river",       "road",        "rock",       "role",       "roof",       "room",
         "root",        "rule",        "safety",     "salt",       "sample",     "sand",
         "scale",       "scene",       "school",     "science",    "scientist",  "score",
         "screen",      "sea",         "search",     "season",     "seat",       "second",
         "section",     "sector",      "security",   "sense",      "sentence",   "series",
         "service",     "session",     "shape",      "share",      "shark",      "sheep",
         "ship",        "shoe",        "shop",       "shoulder",   "side",       "sign",
         "signal",      "silver",      "sister",     "site",       "situation",  "size",
         "skill",       "skin",        "sky",        "snake",      "snow",       "society",
         "software",    "soil",        "solution",   "son",        "song",       "sound",
         "source",      "south",       "space",      "speaker",    "speech",     "speed",
         "spider",      "sport",       "spring",     "square",     "staff",      "stage",
         "standard",    "star",        "state",      "statement",  "station",    "status",
         "step",        "stock",       "stomach",    "stone",      "store",      "storm",
         "story",       "strategy",    "street",     "strength",   "structure",  "student",
         "study",       "style",       "subject",    "success",    "sugar",      "summer",
         "sun",         "surface",     "survey",     "symbol",     "symptom",    "system",
         "table",       "target",      "task",       "tax",        "tea",        "teacher",
         "team",        "technology",  "temperature", "term",      "test",       "text",
         "theory",      "thing",       "tiger",      "time",       "tissue",     "title",
         "tool",        "tooth",       "top",        "topic",      "town",       "trade",
         "tradition",   "traffic",     "train",      "treatment",  "tree",       "trial",
         "trip",        "truck",       "truth",      "type",       "unit",       "university",
         "user",        "valley",      "value",      "variety",    "vehicle",    "version",
         "video",       "view",        "village",    "virus",      "vitamin",    "voice",
         "volume",      "walk",        "wall",       "war",        "water",      "wave",
         "way",         "wealth",      "weather",    "web",        "website",    "week",
         "weekend",     "weight",      "west",       "whale",      "wheel",      "width",
         "wife",        "wind",        "window",     "winter",     "wolf",       "woman",
         "women",       "wood",        "word",       "work",       "worker",     "world",
         "writer",      "yard",        "year",       "youth",      "zone"},
        std::string(kLexiconVersion)};
    return list;
}

// Lowercase tokens (with their trailing period) that never end a sentence.
inline const std::unordered_set<std::string>& bundled_abbreviations() {
    static const std::unordered_set<std::string> abbrevs{
        "dr.",   "mr.",    "mrs.",  "ms.",   "prof.", "sr.",   "jr.",    "st.",  "mt.",
        "no.",   "vs.",    "etc.",  "e.g.",  "i.e.",  "cf.",   "u.s.",   "u.k.", "u.n.",
        "inc.",  "ltd.",   "co.",   "corp.", "dept.", "est.",  "approx.", "fig.", "vol.",
        "pp.",   "ed.",    "al.",   "jan.",  "feb.",  "mar.",  "apr.",   "jun.", "jul.",
        "aug.",  "sep.",   "sept.", "oct.",  "nov.",  "dec.",  "mon.",   "tue.", "wed.",
        "thu.",  "fri.",   "sat.",  "sun.",  "a.m.",  "p.m.",  "ph.d.",  "b.a.", "m.a.",
        "b.sc.", "m.sc.",  "min.",  "max.",  "avg.",  "oz.",   "lbs.",   "ft.",  "gal."};
    return abbrevs;
}

}  // namespace rankinject
