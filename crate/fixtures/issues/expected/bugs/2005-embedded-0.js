print(new Date("1/1/49").getFullYear());
print(new Date("1/1/50").getFullYear());
