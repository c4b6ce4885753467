var arr = [];
Object.defineProperty(arr, "length", { get: function () { return 1; } });
