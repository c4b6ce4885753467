var s = 'a'.repeat(1 << 28);
print(s.length);
