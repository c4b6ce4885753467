class A {
  x = this.constructor.name;
}
class B extends A {}
print(new B().x);
