using UnityEngine;

// __CLASS__ is a specialised enemy archetype with a ranged attack.
__NOTES__
public class __CLASS__ : MonoBehaviour
{
    [SerializeField] private float moveSpeed = 3f;
    [SerializeField] private float attackInterval = 1.5f;
    [SerializeField] private float aggroRange = 7f;
    [SerializeField] private int maxHealth = 20;

    private Transform target;
    private float attackTimer;
    private int health;

    private void Start()
    {
        health = maxHealth;
        GameObject player = GameObject.FindWithTag("Player");
        target = player != null ? player.transform : null;
    }

    private void Update()
    {
        if (target == null)
        {
            return;
        }
        attackTimer -= Time.deltaTime;
        float distance = Vector2.Distance(transform.position, target.position);
        if (distance <= aggroRange && attackTimer <= 0f)
        {
            Attack();
        }
        else if (distance > aggroRange)
        {
            transform.position = Vector2.MoveTowards(transform.position, target.position, moveSpeed * Time.deltaTime);
        }
    }

    private void Attack()
    {
        attackTimer = attackInterval;
        target.SendMessage("ApplyKnockback", (Vector2)(target.position - transform.position).normalized, SendMessageOptions.DontRequireReceiver);
    }

    public void TakeDamage(int amount)
    {
        health -= amount;
        if (health <= 0)
        {
            Destroy(gameObject);
        }
    }
}
