//! Static word lists backing the rule-based entity extractor and answer-type rules.
//! Every entry is lowercase.

pub const MONTHS: &[&str] = &[
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

pub const SPELLED_NUMBERS: &[&str] = &[
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
    "twenty",
];

pub const ORDINAL_WORDS: &[&str] = &[
    "first",
    "second",
    "third",
    "fourth",
    "fifth",
    "sixth",
    "seventh",
    "eighth",
    "ninth",
    "tenth",
    "eleventh",
    "twelfth",
    "thirteenth",
    "fourteenth",
    "fifteenth",
    "sixteenth",
    "seventeenth",
    "eighteenth",
    "nineteenth",
    "twentieth",
];

pub const MAGNITUDES: &[&str] = &["thousand", "million", "billion", "trillion"];

pub const CURRENCY_WORDS: &[&str] = &["dollars", "dollar", "euros", "euro", "pounds", "yen"];

pub const ORGANIZATION_CUES: &[&str] = &[
    "inc",
    "corp",
    "corporation",
    "ltd",
    "llc",
    "company",
    "co",
    "university",
    "college",
    "institute",
    "association",
    "bank",
    "group",
    "foundation",
    "party",
    "agency",
    "council",
    "committee",
    "league",
    "federation",
    "society",
    "union",
    "church",
    "school",
    "club",
    "department",
    "ministry",
    "commission",
    "network",
    "records",
    "press",
];

pub const FACILITY_CUES: &[&str] = &[
    "stadium",
    "arena",
    "center",
    "centre",
    "tower",
    "bridge",
    "airport",
    "field",
    "dome",
    "hall",
    "coliseum",
    "colosseum",
    "museum",
    "station",
    "palace",
    "cathedral",
    "castle",
    "theater",
    "theatre",
    "building",
    "library",
    "park",
    "temple",
    "gardens",
];

pub const VENUE_CUES: &[&str] = &[
    "stadium",
    "arena",
    "field",
    "center",
    "centre",
    "dome",
    "coliseum",
    "colosseum",
    "hall",
    "theater",
    "theatre",
    "park",
    "ballpark",
    "speedway",
    "gardens",
    "court",
    "bowl",
];

pub const EVENT_CUES: &[&str] = &[
    "bowl",
    "olympics",
    "games",
    "cup",
    "war",
    "fair",
    "championship",
    "championships",
    "festival",
    "revolution",
    "expo",
    "series",
    "open",
    "summit",
    "conference",
    "battle",
    "election",
    "tournament",
];

pub const HONORIFICS: &[&str] = &[
    "mr",
    "mrs",
    "ms",
    "dr",
    "sir",
    "president",
    "king",
    "queen",
    "prince",
    "princess",
    "professor",
    "prof",
    "gen",
    "general",
    "lord",
    "lady",
    "saint",
    "pope",
    "senator",
    "governor",
    "captain",
    "emperor",
];

pub const GIVEN_NAMES: &[&str] = &[
    "john",
    "jane",
    "james",
    "mary",
    "robert",
    "patricia",
    "michael",
    "jennifer",
    "william",
    "linda",
    "david",
    "elizabeth",
    "richard",
    "barbara",
    "joseph",
    "susan",
    "thomas",
    "jessica",
    "charles",
    "sarah",
    "christopher",
    "karen",
    "daniel",
    "nancy",
    "matthew",
    "lisa",
    "anthony",
    "betty",
    "mark",
    "margaret",
    "donald",
    "sandra",
    "steven",
    "ashley",
    "paul",
    "kimberly",
    "andrew",
    "emily",
    "joshua",
    "donna",
    "kenneth",
    "michelle",
    "kevin",
    "carol",
    "brian",
    "amanda",
    "george",
    "melissa",
    "edward",
    "deborah",
    "peter",
    "anna",
    "henry",
    "alice",
    "frank",
    "helen",
    "gustave",
    "albert",
    "isaac",
    "marie",
    "nikola",
    "ludwig",
    "wolfgang",
    "johann",
    "leonardo",
    "napoleon",
    "winston",
    "abraham",
    "martin",
    "peyton",
    "cam",
    "tom",
    "louis",
    "victor",
    "pierre",
    "jean",
    "carl",
    "karl",
    "maria",
    "sophia",
    "emma",
    "olivia",
    "ada",
    "grace",
    "alan",
    "steve",
    "bill",
    "elon",
    "barack",
    "hillary",
    "ronald",
    "franklin",
    "theodore",
    "harry",
    "dwight",
    "lyndon",
    "jimmy",
    "gerald",
    "walter",
    "samuel",
    "benjamin",
];

/// Single- and multi-word place names.
pub const PLACES: &[&str] = &[
    // countries
    "afghanistan",
    "argentina",
    "australia",
    "austria",
    "belgium",
    "brazil",
    "canada",
    "chile",
    "china",
    "colombia",
    "cuba",
    "denmark",
    "egypt",
    "england",
    "finland",
    "france",
    "germany",
    "greece",
    "india",
    "indonesia",
    "iran",
    "iraq",
    "ireland",
    "israel",
    "italy",
    "japan",
    "kenya",
    "korea",
    "mexico",
    "morocco",
    "netherlands",
    "nigeria",
    "norway",
    "pakistan",
    "peru",
    "poland",
    "portugal",
    "russia",
    "scotland",
    "spain",
    "sweden",
    "switzerland",
    "turkey",
    "ukraine",
    "vietnam",
    "wales",
    "britain",
    "america",
    "europe",
    "asia",
    "africa",
    "antarctica",
    "united states",
    "united kingdom",
    "south africa",
    "new zealand",
    "saudi arabia",
    "north korea",
    "south korea",
    // us states
    "alabama",
    "alaska",
    "arizona",
    "arkansas",
    "california",
    "colorado",
    "connecticut",
    "delaware",
    "florida",
    "georgia",
    "hawaii",
    "idaho",
    "illinois",
    "indiana",
    "iowa",
    "kansas",
    "kentucky",
    "louisiana",
    "maine",
    "maryland",
    "massachusetts",
    "michigan",
    "minnesota",
    "mississippi",
    "missouri",
    "montana",
    "nebraska",
    "nevada",
    "new hampshire",
    "new jersey",
    "new mexico",
    "new york",
    "north carolina",
    "north dakota",
    "ohio",
    "oklahoma",
    "oregon",
    "pennsylvania",
    "rhode island",
    "south carolina",
    "south dakota",
    "tennessee",
    "texas",
    "utah",
    "vermont",
    "virginia",
    "washington",
    "west virginia",
    "wisconsin",
    "wyoming",
    // cities
    "paris",
    "london",
    "berlin",
    "madrid",
    "rome",
    "tokyo",
    "beijing",
    "shanghai",
    "moscow",
    "cairo",
    "sydney",
    "toronto",
    "chicago",
    "boston",
    "denver",
    "houston",
    "dallas",
    "miami",
    "seattle",
    "atlanta",
    "phoenix",
    "detroit",
    "philadelphia",
    "los angeles",
    "san francisco",
    "san diego",
    "santa clara",
    "san jose",
    "new orleans",
    "las vegas",
    "charlotte",
    "vienna",
    "amsterdam",
    "brussels",
    "lisbon",
    "athens",
    "dublin",
    "stockholm",
    "oslo",
    "warsaw",
    "prague",
    "budapest",
    "istanbul",
    "mumbai",
    "delhi",
    "bangkok",
    "singapore",
    "seoul",
    "hong kong",
    "rio de janeiro",
    "buenos aires",
    "mexico city",
    "montreal",
    "vancouver",
    "melbourne",
    "geneva",
    "zurich",
    "munich",
    "hamburg",
    "milan",
    "venice",
    "florence",
    "naples",
    "barcelona",
    "manchester",
    "liverpool",
    "edinburgh",
    "glasgow",
    "oxford",
    "cambridge",
    "normandy",
    "victoria",
    "jerusalem",
    "baghdad",
    "tehran",
    "kyoto",
    "osaka",
    // regions and features
    "pacific",
    "atlantic",
    "mediterranean",
    "siberia",
    "sahara",
    "amazon",
    "nile",
    "alps",
    "himalayas",
    "mississippi river",
    "thames",
    "rhine",
    "danube",
    "caribbean",
];

pub const PLACE_SUFFIXES: &[&str] = &["land", "ville", "burg", "shire", "stan", "polis"];

/// Capitalised function words that never start an entity.
pub const CAPITALIZED_STOPWORDS: &[&str] = &[
    "the",
    "a",
    "an",
    "it",
    "he",
    "she",
    "they",
    "we",
    "i",
    "you",
    "this",
    "that",
    "these",
    "those",
    "however",
    "some",
    "in",
    "on",
    "at",
    "by",
    "for",
    "from",
    "with",
    "after",
    "before",
    "during",
    "when",
    "where",
    "who",
    "what",
    "which",
    "why",
    "how",
    "there",
    "his",
    "her",
    "its",
    "their",
    "our",
    "my",
    "your",
    "but",
    "and",
    "or",
    "if",
    "as",
    "of",
    "to",
    "contrary",
    "although",
    "though",
    "while",
    "since",
    "because",
    "many",
    "most",
    "several",
    "both",
    "each",
    "every",
    "all",
    "one",
    "another",
    "other",
    "such",
    "also",
    "then",
    "thus",
    "yes",
    "no",
    "not",
    "name",
    "is",
    "was",
    "are",
    "were",
    "did",
    "does",
    "do",
    "has",
    "have",
    "had",
    "can",
    "could",
    "would",
    "should",
    "may",
    "might",
    "must",
    "will",
    "according",
    "despite",
    "during",
    "until",
    "unlike",
    "like",
    "through",
    "over",
    "under",
    "later",
    "earlier",
    "today",
    "yesterday",
    "here",
    "so",
    "following",
    "neither",
    "nor",
    "never",
    "none",
];

pub fn is_place(lower: &str) -> bool {
    PLACES.contains(&lower)
}

pub fn has_place_suffix(lower: &str) -> bool {
    PLACE_SUFFIXES
        .iter()
        .any(|s| lower.len() > s.len() + 2 && lower.ends_with(s))
}
