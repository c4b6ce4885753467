//!mock chakra throw:TypeError:Intl.Segmenter is not a constructor
var ok = typeof Intl === "object";
assert(ok);
