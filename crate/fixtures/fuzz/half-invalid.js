x = (a + b) * (c - d);
y = [x, x];
