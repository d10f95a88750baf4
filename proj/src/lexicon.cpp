#include "lexicon.hpp"

#include <algorithm>
#include <iterator>

namespace prockit::lexicon {
namespace {

constexpr std::string_view kVerbs[] = {
    "accept", "access", "add", "adjust", "admire", "adopt", "advertise",
    "aim", "air", "align", "allow", "alternate", "analyze", "anchor", "angle",
    "announce", "answer", "apply", "approach", "arch", "arrange", "ask",
    "assemble", "assess", "assign", "attach", "attend", "attract", "avoid",
    "bag", "bake", "balance", "bandage", "baste", "bathe", "be", "beat",
    "begin", "bend", "bind", "blanch", "blend", "block", "blot", "blow",
    "board", "boil", "bolt", "book", "boost", "borrow", "bounce", "bow",
    "braid", "brainstorm", "braise", "break", "breathe", "brew", "bring",
    "broil", "browse", "brush", "buckle", "budget", "build", "bundle", "burn",
    "bury", "butter", "button", "buy", "calculate", "calibrate", "call",
    "calm", "cancel", "cap", "carry", "carve", "catch", "caulk", "center",
    "change", "charge", "chart", "chat", "check", "chew", "chill", "chip",
    "choose", "chop", "circle", "clamp", "clap", "clarify", "clean",
    "cleanse", "clear", "click", "climb", "clip", "close", "coat", "collect",
    "color", "comb", "combine", "come", "comfort", "commit", "communicate",
    "compare", "compile", "complete", "compose", "compost", "compress",
    "compute", "concentrate", "condition", "confirm", "connect", "consider",
    "consult", "contact", "continue", "control", "convert", "cook", "cool",
    "coordinate", "copy", "core", "correct", "count", "cover", "crack",
    "craft", "cram", "crease", "create", "crimp", "crop", "cross", "crumble",
    "crush", "cry", "cube", "cultivate", "cup", "curl", "cut", "cycle", "dab",
    "dampen", "dance", "date", "deal", "debone", "decide", "declutter",
    "decorate", "deep-fry", "defrost", "delete", "deliver", "demonstrate",
    "describe", "design", "detach", "determine", "develop", "dial", "dice",
    "dictate", "dig", "dilute", "dim", "dip", "direct", "disassemble",
    "discard", "disconnect", "discuss", "dish", "disinfect", "dispose",
    "dissolve", "distribute", "divide", "do", "document", "donate", "double",
    "download", "drag", "drain", "drape", "draw", "dress", "dribble", "drill",
    "drink", "drip", "drive", "drizzle", "drop", "dry", "dunk", "dust", "dye",
    "earn", "eat", "edit", "elevate", "eliminate", "email", "embrace",
    "empty", "encourage", "end", "engage", "enjoy", "enroll", "ensure",
    "enter", "erase", "establish", "estimate", "evaluate", "examine",
    "exchange", "exercise", "exhale", "expand", "expect", "experiment",
    "explain", "explore", "export", "expose", "extend", "extract", "face",
    "fasten", "feed", "feel", "fertilize", "fetch", "file", "fill", "film",
    "filter", "find", "finish", "fire", "fit", "fix", "flatten", "flip",
    "float", "floss", "flour", "fluff", "flush", "fly", "fold", "follow",
    "form", "forward", "frame", "freeze", "frost", "fry", "gain", "garnish",
    "gather", "get", "give", "glaze", "glue", "go", "google", "grab", "grade",
    "graduate", "grate", "grease", "greet", "grill", "grind", "grip", "grow",
    "guide", "hammer", "handle", "hang", "harvest", "have", "head", "heat",
    "help", "hide", "highlight", "hike", "hire", "hit", "hold", "hook", "hop",
    "hug", "hum", "hunt", "hurry", "ice", "identify", "ignore", "imagine",
    "implement", "import", "improve", "include", "incorporate", "increase",
    "indicate", "inflate", "inform", "inhale", "insert", "inspect", "install",
    "insulate", "insure", "introduce", "invest", "invite", "iron", "join",
    "journal", "judge", "juice", "jump", "keep", "kick", "kill", "knead",
    "kneel", "knit", "knock", "knot", "label", "lace", "lay", "layer", "lead",
    "lean", "learn", "leave", "lend", "let", "level", "lick", "lie", "lift",
    "light", "limit", "line", "link", "list", "listen", "load", "loan",
    "locate", "lock", "log", "look", "loosen", "lower", "lubricate",
    "maintain", "make", "manage", "map", "marinate", "mark", "mash",
    "massage", "match", "measure", "meditate", "meet", "melt", "memorize",
    "mend", "mention", "message", "microwave", "milk", "mince", "mind",
    "minimize", "mist", "mix", "moisten", "moisturize", "monitor", "mop",
    "mount", "move", "mow", "multiply", "nail", "name", "narrow", "navigate",
    "need", "negotiate", "network", "note", "notice", "notify", "number",
    "observe", "obtain", "offer", "oil", "open", "operate", "order",
    "organize", "outline", "overlap", "pack", "package", "paint", "pair",
    "pan", "park", "participate", "paste", "pat", "patch", "pause", "pay",
    "peel", "pencil", "perform", "persuade", "photograph", "pick", "pierce",
    "pile", "pin", "pinch", "pipe", "pitch", "place", "plan", "plant", "play",
    "pluck", "plug", "poach", "point", "poke", "polish", "pop", "position",
    "post", "pot", "pound", "pour", "powder", "practice", "praise", "pray",
    "preheat", "prepare", "present", "preserve", "press", "pretend",
    "prevent", "price", "prime", "print", "prioritize", "process", "produce",
    "program", "promote", "prop", "protect", "provide", "prune", "publish",
    "puff", "pull", "pump", "punch", "purchase", "puree", "push", "put",
    "quarter", "question", "quit", "rake", "rate", "reach", "read",
    "reassemble", "rebuild", "receive", "recharge", "recite", "recognize",
    "record", "recycle", "reduce", "refer", "refill", "reflect",
    "refrigerate", "refuel", "register", "reheat", "reinforce", "relax",
    "release", "reload", "remain", "remember", "remind", "remove", "renew",
    "rent", "repair", "repeat", "rephrase", "replace", "reply", "report",
    "request", "research", "reserve", "reset", "resize", "resolve", "respect",
    "respond", "rest", "restart", "restore", "retrieve", "return", "reuse",
    "review", "revise", "reward", "rewind", "rinse", "rip", "roast", "rock",
    "roll", "rotate", "round", "rub", "run", "rush", "sand", "saute", "save",
    "saw", "say", "scan", "schedule", "scoop", "score", "scrape", "scratch",
    "scream", "screw", "scrub", "seal", "search", "season", "seat", "secure",
    "see", "seed", "select", "sell", "send", "separate", "serve", "set",
    "settle", "sew", "shake", "shampoo", "shape", "share", "sharpen", "shave",
    "shell", "shift", "shine", "ship", "shop", "shorten", "shout", "show",
    "shower", "shred", "shut", "sift", "sign", "simmer", "sing", "sip", "sit",
    "size", "sketch", "ski", "skim", "skip", "slice", "slide", "slip", "slow",
    "smash", "smell", "smile", "smooth", "snap", "sniff", "soak", "soap",
    "sort", "speak", "spend", "spice", "spin", "split", "spoon", "spray",
    "spread", "spring", "sprinkle", "sprout", "squeeze", "stack", "stain",
    "stand", "staple", "start", "state", "stay", "steam", "steep", "step",
    "sterilize", "stick", "stir", "stitch", "stop", "store", "straighten",
    "strain", "stream", "strengthen", "stretch", "strike", "strip", "stroke",
    "stuff", "style", "submit", "subscribe", "substitute", "subtract", "suck",
    "suggest", "sum", "summarize", "supervise", "supply", "support",
    "surround", "swallow", "swap", "sweep", "sweeten", "swim", "swing",
    "switch", "tag", "take", "talk", "tap", "taste", "teach", "tear", "tell",
    "tend", "test", "text", "thank", "thaw", "thin", "think", "thread",
    "throw", "tidy", "tie", "tighten", "tilt", "time", "tip", "toast", "toss",
    "touch", "tow", "trace", "track", "trade", "train", "transfer",
    "translate", "transplant", "transport", "trap", "travel", "treat", "trim",
    "try", "tuck", "tune", "turn", "tutor", "twist", "type", "uncover",
    "understand", "undo", "unfold", "unhook", "unlock", "unpack", "unplug",
    "unscrew", "untie", "update", "upgrade", "upload", "use", "vacuum",
    "validate", "vary", "vent", "verify", "view", "visit", "vote", "wait",
    "wake", "walk", "want", "warm", "warn", "wash", "watch", "water", "wax",
    "wear", "weave", "weed", "weigh", "welcome", "wet", "whip", "whisk",
    "widen", "win", "wind", "wipe", "wire", "wish", "withdraw", "work",
    "worry", "wrap", "write", "yell", "zip",
};

constexpr std::string_view kNonVerbs[] = {
    "a", "about", "above", "across", "after", "against", "all", "along",
    "also", "although", "always", "am", "among", "an", "and", "any", "are",
    "around", "at", "because", "been", "before", "behind", "being", "below",
    "beside", "besides", "between", "beyond", "both", "but", "by", "can",
    "could", "did", "does", "during", "each", "either", "every", "few", "for",
    "from", "had", "has", "he", "her", "here", "him", "his", "how", "i", "if",
    "in", "inside", "into", "is", "it", "its", "itself", "just", "later",
    "like", "many", "may", "me", "might", "more", "most", "much", "must",
    "my", "myself", "near", "neither", "never", "no", "nor", "not", "now",
    "of", "off", "often", "on", "once", "onto", "or", "our", "ourselves",
    "out", "outside", "over", "per", "quite", "rather", "really", "several",
    "shall", "she", "should", "since", "so", "some", "sometimes", "soon",
    "such", "than", "that", "the", "their", "them", "themselves", "then",
    "there", "these", "they", "this", "those", "though", "through", "to",
    "too", "toward", "towards", "under", "unless", "until", "upon", "us",
    "usually", "very", "via", "was", "we", "were", "what", "whatever", "when",
    "where", "whereas", "whether", "which", "whichever", "while", "who",
    "whoever", "whom", "whose", "why", "will", "with", "within", "without",
    "would", "yet", "you", "your", "yourself", "yourselves",
};

constexpr std::string_view kFunctionWords[] = {
    "a", "about", "above", "across", "after", "against", "all", "along",
    "although", "am", "among", "an", "and", "any", "are", "around", "as",
    "at", "be", "because", "been", "before", "behind", "being", "below",
    "beside", "besides", "between", "beyond", "both", "but", "by", "can",
    "could", "did", "do", "does", "during", "each", "either", "every", "few",
    "for", "from", "had", "has", "have", "he", "her", "him", "his", "how",
    "i", "if", "in", "inside", "into", "is", "it", "its", "itself", "like",
    "many", "may", "me", "might", "more", "most", "much", "must", "my",
    "myself", "near", "neither", "no", "nor", "not", "of", "off", "on",
    "once", "onto", "or", "our", "ourselves", "out", "outside", "over", "per",
    "several", "shall", "she", "should", "since", "so", "some", "such",
    "than", "that", "the", "their", "them", "themselves", "then", "these",
    "they", "this", "those", "though", "through", "to", "toward", "towards",
    "under", "unless", "until", "upon", "us", "via", "was", "we", "were",
    "what", "when", "where", "whereas", "whether", "which", "while", "who",
    "whom", "whose", "why", "will", "with", "within", "without", "would",
    "yet", "you", "your", "yourself", "yourselves",
};

constexpr std::string_view kDeterminers[] = {
    "a", "an", "another", "any", "each", "enough", "every", "few", "her",
    "his", "its", "less", "many", "more", "much", "my", "one", "our",
    "several", "some", "that", "the", "their", "these", "this", "those",
    "three", "two", "your",
};

constexpr std::string_view kUnits[] = {
    "centimeter", "centimeters", "clove", "cloves", "cm", "cup", "cups",
    "dash", "dashes", "day", "days", "degree", "degrees", "feet", "foot",
    "ft", "g", "gallon", "gallons", "gram", "grams", "hour", "hours", "hr",
    "hrs", "inch", "inches", "kg", "kilogram", "kilograms", "kilometer",
    "kilometers", "km", "l", "lb", "lbs", "liter", "liters", "litre",
    "litres", "m", "meter", "meters", "metre", "metres", "mg", "mile",
    "miles", "milligram", "milligrams", "milliliter", "milliliters",
    "millimeter", "millimeters", "min", "mins", "minute", "minutes", "ml",
    "mm", "month", "months", "ounce", "ounces", "oz", "percent", "piece",
    "pieces", "pinch", "pinches", "pint", "pints", "pound", "pounds", "quart",
    "quarts", "sec", "second", "seconds", "secs", "slice", "slices",
    "tablespoon", "tablespoons", "tbsp", "teaspoon", "teaspoons",
    "tsp", "week", "weeks", "yard", "yards", "year", "years",
};

constexpr std::string_view kNumberWords[] = {
    "eight", "eleven", "fifteen", "fifty", "five", "forty",
    "four", "half", "hundred", "nine", "one", "quarter", "seven",
    "six", "sixty", "ten", "thirty", "three", "twelve", "twenty", "two",
};

template <std::size_t N>
bool contains(const std::string_view (&words)[N], std::string_view w) {
  return std::binary_search(std::begin(words), std::end(words), w);
}

}  // namespace

bool is_verb(std::string_view w) { return contains(kVerbs, w); }
bool is_non_verb(std::string_view w) { return contains(kNonVerbs, w); }
bool is_function_word(std::string_view w) { return contains(kFunctionWords, w); }
bool is_determiner(std::string_view w) { return contains(kDeterminers, w); }
bool is_unit(std::string_view w) { return contains(kUnits, w); }
bool is_number_word(std::string_view w) { return contains(kNumberWords, w); }

}  // namespace prockit::lexicon
