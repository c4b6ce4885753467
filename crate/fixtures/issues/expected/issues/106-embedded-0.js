print("a".localeCompare("B", undefined, { sensitivity: "base" }));

print("a".localeCompare("A", undefined, { sensitivity: "base" }));
