var re = /a/y;
re.lastIndex = 1;
re.test("ab");
print(re.lastIndex);
